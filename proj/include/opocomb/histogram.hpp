#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "units.hpp"

namespace opocomb
{

// Half-open interval [lo, hi) on the delay axis, picoseconds.
struct TimeRange
{
    double lo = 0.0;
    double hi = 0.0;

    bool overlaps(double a, double b) const { return a < hi && lo < b; }
    bool operator==(const TimeRange &) const = default;
};

struct Acquisition
{
    double duration_s = 0.0;
    std::string label;
    std::optional<std::uint64_t> seed; // set for simulated data
    bool operator==(const Acquisition &) const = default;
};

// Binned coincidence counts on a delay axis, pTA style. Axis in picoseconds.
struct Histogram
{
    double bin_width = 4.88;
    double origin = 0.0; // left edge of bin 0
    std::vector<std::int64_t> counts;
    std::vector<TimeRange> masks; // bins overlapping any range are excluded
    Acquisition acquisition;

    std::size_t size() const { return counts.size(); }
    double bin_lo(std::size_t i) const { return origin + static_cast<double>(i) * bin_width; }
    double bin_center(std::size_t i) const { return origin + (static_cast<double>(i) + 0.5) * bin_width; }
    double bin_center_s(std::size_t i) const { return units::ps_to_s(bin_center(i)); }
    double span() const { return static_cast<double>(counts.size()) * bin_width; }

    bool masked(std::size_t i) const
    {
        const double lo = bin_lo(i), hi = lo + bin_width;
        for (const auto &r : masks)
            if (r.overlaps(lo, hi))
                return true;
        return false;
    }

    std::int64_t total() const
    {
        std::int64_t t = 0;
        for (auto c : counts)
            t += c;
        return t;
    }

    bool operator==(const Histogram &) const = default;
};

inline void validate(const Histogram &h)
{
    if (!(h.bin_width > 0.0))
        throw InvalidInput("histogram: bin width must be positive");
    if (h.counts.empty())
        throw InvalidInput("histogram: at least one bin is required");
    for (auto c : h.counts)
        if (c < 0)
            throw InvalidInput("histogram: counts must be non-negative");
    for (const auto &r : h.masks)
        if (!(r.lo < r.hi))
            throw InvalidInput("histogram: mask ranges need lo < hi");
}

// Per-bin visibility after applying the histogram's own masks and any extra ranges.
inline std::vector<bool> visible_bins(const Histogram &h, const std::vector<TimeRange> &extra = {})
{
    std::vector<bool> vis(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
    {
        bool hidden = h.masked(i);
        const double lo = h.bin_lo(i), hi = lo + h.bin_width;
        for (const auto &r : extra)
            hidden = hidden || r.overlaps(lo, hi);
        vis[i] = !hidden;
    }
    return vis;
}

} // namespace opocomb
