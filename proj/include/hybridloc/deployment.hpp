#pragma once

#include "hybridloc/models.hpp"

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hybridloc {

/// Set of anchors with unique ids and id lookup.
class Deployment {
public:
    Deployment() = default;
    explicit Deployment(std::vector<Anchor> anchors);

    const std::vector<Anchor>& anchors() const { return anchors_; }
    bool empty() const { return anchors_.empty(); }
    std::size_t size() const { return anchors_.size(); }

    /// Throws LookupError for unknown ids.
    const Anchor& at(const std::string& id) const;
    const Anchor* find(const std::string& id) const;

    std::vector<Anchor> of_tech(Tech tech) const;

    /// TDOA reference: the UWB anchor with the lexicographically smallest id.
    std::optional<Anchor> tdoa_reference() const;

private:
    std::vector<Anchor> anchors_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace hybridloc
