#include "polburst/space.hpp"

#include <set>

namespace polburst {

SpaceLayout SpaceLayout::compose(std::vector<Subsystem> subsystems)
{
    if (subsystems.empty()) {
        throw std::invalid_argument("SpaceLayout: at least one subsystem required");
    }
    std::set<std::string> seen;
    SpaceLayout layout;
    layout.total_ = 1;
    for (const auto& s : subsystems) {
        if (s.dim < 1) {
            throw std::invalid_argument("SpaceLayout: subsystem '" + s.label +
                                        "' has nonpositive dimension");
        }
        if (!seen.insert(s.label).second) {
            throw std::invalid_argument("SpaceLayout: duplicate label '" + s.label + "'");
        }
        layout.total_ *= s.dim;
    }
    layout.subs_ = std::move(subsystems);
    return layout;
}

bool SpaceLayout::has(const std::string& label) const noexcept
{
    for (const auto& s : subs_) {
        if (s.label == label) return true;
    }
    return false;
}

int SpaceLayout::index_of(const std::string& label) const
{
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        if (subs_[i].label == label) return static_cast<int>(i);
    }
    throw std::invalid_argument("SpaceLayout: unknown label '" + label + "'");
}

int SpaceLayout::dim_of(const std::string& label) const
{
    return subs_[static_cast<std::size_t>(index_of(label))].dim;
}

int SpaceLayout::dim_before(int pos) const
{
    int d = 1;
    for (int i = 0; i < pos; ++i) d *= subs_[static_cast<std::size_t>(i)].dim;
    return d;
}

int SpaceLayout::dim_after(int pos) const
{
    int d = 1;
    for (std::size_t i = static_cast<std::size_t>(pos) + 1; i < subs_.size(); ++i) {
        d *= subs_[i].dim;
    }
    return d;
}

bool SpaceLayout::operator==(const SpaceLayout& other) const noexcept
{
    if (subs_.size() != other.subs_.size()) return false;
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        if (subs_[i].label != other.subs_[i].label) return false;
        if (subs_[i].dim != other.subs_[i].dim) return false;
    }
    return true;
}

SpaceLayout single_space(const std::string& label, int dim)
{
    return SpaceLayout::compose({{label, dim}});
}

} // namespace polburst
