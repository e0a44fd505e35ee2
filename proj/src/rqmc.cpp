#include "spt/rqmc.hpp"

#include <numeric>

namespace spt {

EstimateWithError energy_estimator(std::span<const double> end_energies) {
    const BlockingAnalysis b = blocking_analysis(end_energies);
    EstimateWithError out;
    out.mean = b.mean;
    out.std_error = b.error;
    const auto& lv = b.levels;
    const double naive = lv.front().error;
    out.autocorr_time = naive > 0.0 ? 0.5 * (b.error / naive) * (b.error / naive) : 0.0;
    out.effective_samples =
        naive > 0.0 ? static_cast<double>(end_energies.size()) * (naive / b.error) * (naive / b.error)
                    : static_cast<double>(end_energies.size());
    return out;
}

EstimateWithError pure_estimator(std::span<const double> middle_values) { return energy_estimator(middle_values); }

std::size_t equilibration_cut(std::span<const double> values, std::size_t window) {
    if (window < 2) window = 2;
    auto stats = [&](std::size_t start) {
        const auto w = values.subspan(start, window);
        const double m = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(window);
        double ss = 0.0;
        for (double x : w) ss += (x - m) * (x - m);
        return std::pair{m, ss / static_cast<double>(window - 1) / static_cast<double>(window)};
    };
    std::size_t cut = 0;
    while (cut + 2 * window <= values.size() && cut + window <= values.size() / 2) {
        const auto [m0, v0] = stats(cut);
        const auto [m1, v1] = stats(cut + window);
        if (std::abs(m0 - m1) <= std::sqrt(v0 + v1)) return cut;
        cut += window;
    }
    return cut > values.size() / 2 ? values.size() / 2 : cut;
}

} // namespace spt
