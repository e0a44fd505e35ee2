#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace spt {

/// Equally spaced local-energy samples W(R(i * step)).
struct LocalEnergySeries {
    std::vector<double> values;
    double step = 0.0;
    std::size_t burn_in = 0;

    /// Samples after the discarded leading ones.
    std::span<const double> equilibrated() const {
        return std::span<const double>(values).subspan(burn_in < values.size() ? burn_in : values.size());
    }
};

/// Throws Error(validation) when the invariants (finite values, length > burn_in, step > 0) fail.
void validate(const LocalEnergySeries& series);

/// CSV with header "step,W"; one row per sample, burn-in included.
void write_csv(std::ostream& os, const LocalEnergySeries& series);
/// Reads the CSV written by write_csv. The step must be supplied separately.
LocalEnergySeries read_csv(std::istream& is, double step, std::size_t burn_in = 0);

} // namespace spt
