#include "spt/series.hpp"

#include "spt/error.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace spt {

void validate(const LocalEnergySeries& series) {
    if (!(series.step > 0.0)) throw Error(ErrorCategory::validation, "series step must be positive");
    if (series.values.size() <= series.burn_in)
        throw Error(ErrorCategory::validation, "series length must exceed burn_in");
    for (double v : series.values)
        if (!std::isfinite(v)) throw Error(ErrorCategory::validation, "series contains non-finite values");
}

void write_csv(std::ostream& os, const LocalEnergySeries& series) {
    os << "step,W\n";
    char buf[64];
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, series.values[i]);
        os << buf;
    }
}

LocalEnergySeries read_csv(std::istream& is, double step, std::size_t burn_in) {
    LocalEnergySeries out;
    out.step = step;
    out.burn_in = burn_in;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.find_first_of("0123456789") != 0) continue; // header
        const auto comma = line.find(',');
        const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
        try {
            std::size_t used = 0;
            out.values.push_back(std::stod(field, &used));
        } catch (const std::exception&) {
            throw Error(ErrorCategory::parse, "series CSV line " + std::to_string(lineno) + ": bad number");
        }
    }
    validate(out);
    return out;
}

} // namespace spt
