#include "hybridloc/deployment.hpp"

#include "hybridloc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hybridloc {

Deployment::Deployment(std::vector<Anchor> anchors) : anchors_(std::move(anchors)) {
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        const Anchor& a = anchors_[i];
        if (a.id.empty()) {
            throw InvalidArgument("anchor id must not be empty");
        }
        if (!a.position.allFinite()) {
            throw InvalidArgument("anchor '" + a.id + "' has a non-finite position");
        }
        if (!index_.emplace(a.id, i).second) {
            throw InvalidArgument("duplicate anchor id '" + a.id + "'");
        }
    }
}

const Anchor& Deployment::at(const std::string& id) const {
    const Anchor* a = find(id);
    if (a == nullptr) {
        throw LookupError(id);
    }
    return *a;
}

const Anchor* Deployment::find(const std::string& id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &anchors_[it->second];
}

std::vector<Anchor> Deployment::of_tech(Tech tech) const {
    std::vector<Anchor> out;
    std::copy_if(anchors_.begin(), anchors_.end(), std::back_inserter(out),
                 [tech](const Anchor& a) { return a.tech == tech; });
    return out;
}

std::optional<Anchor> Deployment::tdoa_reference() const {
    std::optional<Anchor> ref;
    for (const Anchor& a : anchors_) {
        if (a.tech == Tech::kUwb && (!ref || a.id < ref->id)) {
            ref = a;
        }
    }
    return ref;
}

}  // namespace hybridloc
