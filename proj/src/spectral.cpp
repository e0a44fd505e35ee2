#include "spt/spectral.hpp"

#include "spt/rspt.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <complex>
#include <numbers>

namespace spt {

GBindings g_bindings(const SpectralModel<double>& model, const std::set<GVar>& vars) {
    GBindings out;
    for (const GVar& v : vars) out.emplace(v, g_value(model, v.order, v.deriv));
    return out;
}

// ---------------------------------------------------------------------------
// Laurent oracle

namespace {

using Complex = std::complex<double>;

// G_n(z) by literal summation over k_1..k_{n-1} in [0, D).
Complex chain_sum(const SpectralModel<double>& model, int n, Complex z) {
    if (n == 1) return model.wmat(0, 0);
    const int d = static_cast<int>(model.dim());
    std::vector<int> k(static_cast<std::size_t>(n - 1), 0);
    Complex total = 0.0;
    while (true) {
        // k[0] = k_1 couples to the right-hand ground state, k[n-2] = k_{n-1} to the left
        Complex term = model.wmat(0, k[n - 2]);
        for (int i = n - 2; i >= 1; --i) term *= model.wmat(k[i], k[i - 1]);
        term *= model.wmat(k[0], 0);
        for (int i = 0; i < n - 1; ++i) term /= (model.energies(k[i]) + z);
        total += term;

        int pos = 0;
        while (pos < n - 1 && ++k[pos] == d) k[pos++] = 0;
        if (pos == n - 1) break;
    }
    return total;
}

} // namespace

LaurentCoefficients laurent_oracle(const SpectralModel<double>& model, int n, const LaurentOptions& opts) {
    if (n < 1) throw Error(ErrorCategory::argument_range, "laurent_oracle requires n >= 1");
    validate(model);
    if (n == 1) return {0.0, model.wmat(0, 0)};

    double min_excitation = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 1; k < model.dim(); ++k) min_excitation = std::min(min_excitation, model.energies(k));
    if (!std::isfinite(min_excitation)) return {0.0, 0.0};

    // The principal part has at most n-1 terms, so M points resolve z^1 and z^0
    // exactly once M exceeds n + 1; the regular part aliases as (r / E_min)^M.
    if (opts.points < n + 3 || !(opts.radius_fraction > 0.0) || opts.radius_fraction > 0.9)
        throw Error(ErrorCategory::fit_conditioning,
                    "laurent_oracle z-grid too coarse: need points >= n + 3 and radius_fraction in (0, 0.9]");
    const double r = opts.radius_fraction * min_excitation;
    const int m = opts.points;

    Complex c1 = 0.0;
    Complex c0 = 0.0;
    for (int j = 0; j < m; ++j) {
        const Complex phase = std::polar(1.0, 2.0 * std::numbers::pi * j / m);
        const Complex g = chain_sum(model, n, r * phase);
        c0 += g;
        c1 += g / phase;
    }
    return {c1.real() / (m * r), c0.real() / m};
}

// ---------------------------------------------------------------------------
// Taylor oracle

namespace {

// 113-bit mantissa: grid noise stays far below c_N * delta^N
using Ext = boost::multiprecision::cpp_bin_float_quad;
using ExtVector = std::vector<Ext>;

// Lowest two eigenvalues of diag(e) + lambda w. The extended-precision
// diagonalization provides the eigenvector; the energy is its Rayleigh
// quotient in quad precision, whose error is quadratic in the vector error.
struct LowestPair {
    Ext ground, second;
    double overlap; ///< weight of the ground eigenvector on the unperturbed ground state
};

LowestPair lowest_pair(const VectorX<double>& e, const MatrixX<double>& w, Ext lambda) {
    const Eigen::Index d = e.size();
    const long double lam = static_cast<long double>(lambda);
    MatrixX<long double> h = lam * w.cast<long double>();
    h.diagonal() += e.cast<long double>();
    Eigen::SelfAdjointEigenSolver<MatrixX<long double>> es(h);
    const VectorX<long double> v = es.eigenvectors().col(0);

    Ext num = 0;
    Ext norm = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        Ext hv = Ext(e(i)) * Ext(v(i));
        for (Eigen::Index j = 0; j < d; ++j) hv += lambda * Ext(w(i, j)) * Ext(v(j));
        num += Ext(v(i)) * hv;
        norm += Ext(v(i)) * Ext(v(i));
    }
    const Ext second = d > 1 ? Ext(es.eigenvalues()(1)) : Ext(1e300);
    Eigen::Index i0 = 0;
    e.minCoeff(&i0);
    const double overlap = static_cast<double>(v(i0) * v(i0) / v.squaredNorm());
    return {num / norm, second, overlap};
}

// Least squares through the normal equations, Gaussian elimination with
// partial pivoting. Columns are powers of t in [-1, 1].
ExtVector solve_least_squares(const std::vector<ExtVector>& a, const ExtVector& b) {
    const std::size_t rows = a.size();
    const std::size_t cols = a.front().size();
    std::vector<ExtVector> m(cols, ExtVector(cols + 1, Ext(0)));
    for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t j = 0; j < cols; ++j)
            for (std::size_t r = 0; r < rows; ++r) m[i][j] += a[r][i] * a[r][j];
        for (std::size_t r = 0; r < rows; ++r) m[i][cols] += a[r][i] * b[r];
    }
    for (std::size_t col = 0; col < cols; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < cols; ++r)
            if (abs(m[r][col]) > abs(m[piv][col])) piv = r;
        if (m[piv][col] == 0)
            throw Error(ErrorCategory::fit_conditioning, "taylor_oracle: singular fit matrix");
        std::swap(m[col], m[piv]);
        for (std::size_t r = col + 1; r < cols; ++r) {
            const Ext f = m[r][col] / m[col][col];
            for (std::size_t c = col; c <= cols; ++c) m[r][c] -= f * m[col][c];
        }
    }
    ExtVector x(cols, Ext(0));
    for (std::size_t i = cols; i-- > 0;) {
        Ext s = m[i][cols];
        for (std::size_t c = i + 1; c < cols; ++c) s -= m[i][c] * x[c];
        x[i] = s / m[i][i];
    }
    return x;
}

} // namespace

TaylorCoefficients taylor_oracle(const SpectralModel<double>& model, int N, const TaylorOptions& opts) {
    if (N < 1) throw Error(ErrorCategory::argument_range, "taylor_oracle requires N >= 1");
    validate(model);

    TaylorCoefficients out;
    out.coeffs.assign(static_cast<std::size_t>(N), 0.0);

    Eigen::SelfAdjointEigenSolver<MatrixX<double>> wes(model.wmat, Eigen::EigenvaluesOnly);
    const double wnorm = wes.eigenvalues().cwiseAbs().maxCoeff();
    if (wnorm == 0.0) {
        out.trusted = true;
        return out;
    }

    std::vector<double> sorted(model.energies.data(), model.energies.data() + model.dim());
    std::sort(sorted.begin(), sorted.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < sorted.size(); ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
    if (!std::isfinite(gap)) gap = 1.0;

    const int degree = N + opts.extra_degree;
    const int per_side = degree - 1 + opts.extra_points;
    const Ext lmax = Ext(opts.coupling_fraction * gap / wnorm);
    const Ext delta = lmax / per_side;
    out.delta = static_cast<double>(delta);

    // E_0 on the grid; t = lambda / lmax keeps the fit columns O(1)
    const int npts = 2 * per_side + 1;
    ExtVector t(static_cast<std::size_t>(npts)), e(static_cast<std::size_t>(npts));
    const Ext e1_unperturbed = sorted.size() > 1 ? Ext(sorted[1] - sorted[0]) : Ext(1);
    for (int j = -per_side; j <= per_side; ++j) {
        const auto row = static_cast<std::size_t>(j + per_side);
        const Ext lambda = delta * j;
        const auto [ground, second, overlap] = lowest_pair(model.energies, model.wmat, lambda);
        e[row] = ground;
        t[row] = Ext(j) / per_side;
        if (second - ground < Ext(0.1) * e1_unperturbed || overlap < 0.5)
            throw Error(ErrorCategory::degeneracy,
                        "ground state of H(lambda) approaches a crossing at lambda = " +
                            std::to_string(static_cast<double>(lambda)));
    }

    // even and odd parts fitted separately on the half grid
    ExtVector coeffs(static_cast<std::size_t>(degree + 1), Ext(0));
    for (int parity = 0; parity < 2; ++parity) {
        std::vector<int> powers;
        for (int p = parity; p <= degree; p += 2) powers.push_back(p);
        std::vector<ExtVector> a;
        ExtVector b;
        for (int j = parity; j <= per_side; ++j) {
            const Ext plus = e[static_cast<std::size_t>(per_side + j)];
            const Ext minus = e[static_cast<std::size_t>(per_side - j)];
            const Ext tj = t[static_cast<std::size_t>(per_side + j)];
            b.push_back(parity == 0 ? (plus + minus) / 2 : (plus - minus) / 2);
            ExtVector row;
            for (int p : powers) row.push_back(pow(tj, p));
            a.push_back(std::move(row));
        }
        const ExtVector x = solve_least_squares(a, b);
        for (std::size_t c = 0; c < powers.size(); ++c) coeffs[static_cast<std::size_t>(powers[c])] = x[c];
    }

    double residual = 0.0;
    for (int row = 0; row < npts; ++row) {
        Ext fit = 0;
        for (int p = degree; p >= 0; --p) fit = fit * t[static_cast<std::size_t>(row)] + coeffs[static_cast<std::size_t>(p)];
        residual = std::max(residual, static_cast<double>(abs(fit - e[static_cast<std::size_t>(row)])));
    }
    out.fit_residual = residual;
    out.trusted = residual <= opts.residual_threshold;

    Ext scale = 1;
    for (int n = 1; n <= N; ++n) {
        scale *= lmax;
        out.coeffs[static_cast<std::size_t>(n - 1)] = static_cast<double>(coeffs[static_cast<std::size_t>(n)] / scale);
    }
    return out;
}

std::vector<double> evaluate_epsilons(const SpectralModel<double>& model, int N) {
    validate(model);
    const auto series = epsilon_series(N, std::max(N, default_max_order));
    std::set<GVar> vars;
    for (const auto& r : series) {
        auto v = r.epsilon.variables();
        vars.insert(v.begin(), v.end());
    }
    const GBindings bindings = g_bindings(model, vars);
    std::vector<double> out;
    out.reserve(series.size());
    for (const auto& r : series) out.push_back(evaluate(r.epsilon, bindings));
    return out;
}

// ---------------------------------------------------------------------------
// model builders

MatrixX<double> position_matrix(int basis_size) {
    MatrixX<double> x = MatrixX<double>::Zero(basis_size, basis_size);
    for (int n = 0; n + 1 < basis_size; ++n) {
        x(n, n + 1) = std::sqrt((n + 1) / 2.0);
        x(n + 1, n) = x(n, n + 1);
    }
    return x;
}

namespace {

// x^4 in the first `basis_size` states, built in a padded basis so the
// truncation does not corrupt the retained block.
MatrixX<double> quartic_matrix(int basis_size) {
    const MatrixX<double> x = position_matrix(basis_size + 4);
    const MatrixX<double> x2 = x * x;
    const MatrixX<double> x4 = x2 * x2;
    return x4.topLeftCorner(basis_size, basis_size);
}

} // namespace

SpectralModel<double> build_anharmonic_model(int basis_size, double quartic_coupling) {
    if (basis_size < 20) throw Error(ErrorCategory::argument_range, "basis_size must be at least 20");
    SpectralModel<double> m;
    m.energies = VectorX<double>::LinSpaced(basis_size, 0.0, basis_size - 1.0);
    m.wmat = quartic_coupling * quartic_matrix(basis_size);
    return m;
}

double anharmonic_ground_energy(int basis_size, double quartic_coupling) {
    const SpectralModel<double> m = build_anharmonic_model(basis_size, quartic_coupling);
    MatrixX<double> h = m.wmat;
    h.diagonal() += m.energies.array().matrix() + VectorX<double>::Constant(basis_size, 0.5);
    Eigen::SelfAdjointEigenSolver<MatrixX<double>> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

SpectralModel<double> random_model(int dim, std::mt19937_64& rng, const RandomModelOptions& opts) {
    if (dim < 2) throw Error(ErrorCategory::argument_range, "random_model requires dim >= 2");
    std::uniform_real_distribution<double> energy(opts.energy_min, opts.energy_max);
    std::uniform_real_distribution<double> coupling(-opts.coupling, opts.coupling);

    SpectralModel<double> m;
    m.energies = VectorX<double>::Zero(dim);
    for (int attempt = 0;; ++attempt) {
        if (attempt > 10'000'000)
            throw Error(ErrorCategory::invalid_model, "random_model: gap guard cannot be satisfied");
        std::vector<double> e(static_cast<std::size_t>(dim - 1));
        for (auto& v : e) v = energy(rng);
        std::sort(e.begin(), e.end());
        bool ok = e.front() >= opts.min_gap;
        for (std::size_t i = 1; ok && i < e.size(); ++i) ok = e[i] - e[i - 1] >= opts.min_gap;
        if (!ok) continue;
        for (int k = 1; k < dim; ++k) m.energies(k) = e[static_cast<std::size_t>(k - 1)];
        break;
    }
    MatrixX<double> a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = coupling(rng);
    m.wmat = (a + a.transpose()) / 2.0;
    return m;
}

} // namespace spt
