#include "pcond/oned.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pcond::oned {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_zero_piece(double v) { return v == 0.0; }
bool is_inf_piece(double v) { return std::isinf(v); }
bool is_degenerate(double v) { return is_zero_piece(v) || is_inf_piece(v); }

// sigma^{1/(1-p)} with the convention inf^{1/(1-p)} = 0
double piece_weight(double sigma, double p) {
    if (is_inf_piece(sigma)) return 0.0;
    return std::pow(sigma, 1.0 / (1.0 - p));
}

double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }
double smoothstep_derivative(double s) { return 6.0 * s * (1.0 - s); }

void validate_exponent_1d(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("p must lie in (1, inf)");
    }
}

}  // namespace

PiecewiseConductivity1D PiecewiseConductivity1D::make(std::vector<double> breakpoints,
                                                      std::vector<double> piece_values) {
    if (breakpoints.size() < 2 || piece_values.size() + 1 != breakpoints.size()) {
        throw std::invalid_argument("PiecewiseConductivity1D: need n+1 breakpoints for n pieces");
    }
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1])) {
            throw std::invalid_argument("PiecewiseConductivity1D: breakpoints must increase strictly");
        }
    }
    for (double v : piece_values) {
        if (std::isnan(v) || v < 0.0) {
            throw std::invalid_argument("PiecewiseConductivity1D: values must be in [0, inf]");
        }
    }

    // Merge adjacent pieces carrying the same degenerate tag.
    PiecewiseConductivity1D merged;
    merged.breakpoints.push_back(breakpoints.front());
    for (std::size_t k = 0; k < piece_values.size(); ++k) {
        const double v = piece_values[k];
        if (!merged.piece_values.empty() && is_degenerate(v) && merged.piece_values.back() == v) {
            merged.breakpoints.back() = breakpoints[k + 1];
            continue;
        }
        merged.piece_values.push_back(v);
        merged.breakpoints.push_back(breakpoints[k + 1]);
    }

    const auto& vals = merged.piece_values;
    if (is_degenerate(vals.front()) || is_degenerate(vals.back())) {
        throw std::invalid_argument(
            "PiecewiseConductivity1D: degenerate pieces must not touch the endpoints");
    }
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
        if (is_degenerate(vals[k]) && is_degenerate(vals[k + 1])) {
            throw std::invalid_argument(
                "PiecewiseConductivity1D: zero and infinite pieces must not touch");
        }
    }
    return merged;
}

bool PiecewiseConductivity1D::has_zero_region() const {
    return std::any_of(piece_values.begin(), piece_values.end(), is_zero_piece);
}

bool PiecewiseConductivity1D::has_infinite_region() const {
    return std::any_of(piece_values.begin(), piece_values.end(), is_inf_piece);
}

std::size_t PiecewiseConductivity1D::piece_index(double x) const {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    const std::ptrdiff_t k = std::distance(breakpoints.begin(), it) - 1;
    return std::size_t(std::clamp<std::ptrdiff_t>(k, 0, std::ptrdiff_t(piece_values.size()) - 1));
}

double PiecewiseConductivity1D::value_at(double x) const { return piece_values[piece_index(x)]; }

double phi(double p, double c) {
    if (c == 0.0) return 0.0;
    return std::pow(std::abs(c), p - 2.0) * c;
}

double phi_inverse(double p, double y) {
    if (y == 0.0) return 0.0;
    return std::pow(std::abs(y), (2.0 - p) / (p - 1.0)) * y;
}

Solution1D solve_1d(const PiecewiseConductivity1D& sigma, double p, DirichletPair bc) {
    validate_exponent_1d(p);
    if (!std::isfinite(bc.at_a) || !std::isfinite(bc.at_b)) {
        throw std::invalid_argument("solve_1d: boundary values must be finite");
    }

    Solution1D sol;
    sol.sigma_ = sigma;
    sol.p_ = p;
    sol.bc_ = bc;

    const std::size_t n = sigma.piece_count();
    sol.piece_weight_.resize(n);
    sol.cum_weight_.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = is_zero_piece(sigma.piece_values[k]) ? 0.0
                                                              : piece_weight(sigma.piece_values[k], p);
        sol.piece_weight_[k] = w;
        const double len = sigma.breakpoints[k + 1] - sigma.breakpoints[k];
        sol.cum_weight_[k + 1] = sol.cum_weight_[k] + w * len;
    }

    if (sigma.has_zero_region()) {
        sol.zero_case_ = true;
        sol.flux_ = 0.0;
        sol.energy_ = 0.0;
        sol.weight_total_ = sol.cum_weight_.back();

        double zero_len = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (is_zero_piece(sigma.piece_values[k])) {
                zero_len += sigma.breakpoints[k + 1] - sigma.breakpoints[k];
            }
        }
        sol.level_at_start_.resize(n);
        sol.bridge_delta_.assign(n, 0.0);
        double level = bc.at_a;
        const double total_delta = bc.at_b - bc.at_a;
        for (std::size_t k = 0; k < n; ++k) {
            sol.level_at_start_[k] = level;
            if (is_zero_piece(sigma.piece_values[k])) {
                const double len = sigma.breakpoints[k + 1] - sigma.breakpoints[k];
                sol.bridge_delta_[k] = total_delta * len / zero_len;
                level += sol.bridge_delta_[k];
            }
        }
        return sol;
    }

    sol.zero_case_ = false;
    sol.weight_total_ = sol.cum_weight_.back();
    if (!(sol.weight_total_ > 0.0)) {
        throw std::invalid_argument("solve_1d: total weight vanishes (conductivity infinite a.e.)");
    }
    sol.slope_c_ = (bc.at_b - bc.at_a) / sol.weight_total_;
    sol.flux_ = phi(p, sol.slope_c_);
    // sigma |c w|^p integrates to |c|^p * F(b) since sigma w^p = w
    sol.energy_ = std::pow(std::abs(sol.slope_c_), p) * sol.weight_total_;
    return sol;
}

double Solution1D::value(double x) const {
    const double a = sigma_.a(), b = sigma_.b();
    if (x <= a) return bc_.at_a;
    if (x >= b) return bc_.at_b;
    const std::size_t k = sigma_.piece_index(x);
    if (!zero_case_) {
        const double fx = cum_weight_[k] + piece_weight_[k] * (x - sigma_.breakpoints[k]);
        return bc_.at_a + slope_c_ * fx;
    }
    if (bridge_delta_[k] == 0.0) return level_at_start_[k];
    const double len = sigma_.breakpoints[k + 1] - sigma_.breakpoints[k];
    const double s = (x - sigma_.breakpoints[k]) / len;
    return level_at_start_[k] + bridge_delta_[k] * smoothstep(s);
}

double Solution1D::derivative(double x) const {
    const std::size_t k = sigma_.piece_index(x);
    if (!zero_case_) return slope_c_ * piece_weight_[k];
    if (bridge_delta_[k] == 0.0) return 0.0;
    const double len = sigma_.breakpoints[k + 1] - sigma_.breakpoints[k];
    const double s = std::clamp((x - sigma_.breakpoints[k]) / len, 0.0, 1.0);
    return bridge_delta_[k] * smoothstep_derivative(s) / len;
}

NeumannPair dn_map_1d(const PiecewiseConductivity1D& sigma, double p, DirichletPair bc) {
    const Solution1D sol = solve_1d(sigma, p, bc);
    if (sol.zero_region_case()) return {0.0, 0.0};
    const double flux = sol.flux();
    return {-flux, flux};
}

double weak_pairing_1d(const PiecewiseConductivity1D& sigma, double p, DirichletPair bc,
                       DirichletPair test) {
    const Solution1D sol = solve_1d(sigma, p, bc);
    if (sol.zero_region_case()) return 0.0;
    return sol.flux() * (test.at_b - test.at_a);
}

InvariantRecovery recover_invariant(const DnOracle& dn, double p) {
    validate_exponent_1d(p);
    const DirichletPair probes[] = {{0.0, 1.0}, {1.0, 0.0}, {2.0, -1.0}, {-3.0, 5.0}};
    bool all_zero = true;
    for (const auto& probe : probes) {
        const NeumannPair out = dn(probe);
        if (out.at_a != 0.0 || out.at_b != 0.0) all_zero = false;
    }
    if (all_zero) return {.zero_inclusion = true, .value = 0.0};

    const NeumannPair measured = dn({0.0, 1.0});
    const double c = phi_inverse(p, measured.at_b);  // c = 1 / F(b) > 0 for this probe
    if (!(c > 0.0)) {
        throw std::invalid_argument("recover_invariant: oracle output inconsistent with probe (0,1)");
    }
    return {.zero_inclusion = false, .value = 1.0 / c};
}

EpsilonPairingOracle make_epsilon_oracle(const PiecewiseConductivity1D& sigma, double p,
                                         DirichletPair bc) {
    const Solution1D sol = solve_1d(sigma, p, bc);
    return [sigma, p, sol](double eps, bool at_b) {
        if (!(eps > 0.0) || eps > sigma.b() - sigma.a()) {
            throw std::invalid_argument("epsilon oracle: eps out of range");
        }
        const double lo = at_b ? sigma.b() - eps : sigma.a();
        const double hi = at_b ? sigma.b() : sigma.a() + eps;
        for (std::size_t k = 0; k < sigma.piece_count(); ++k) {
            if (!is_degenerate(sigma.piece_values[k])) continue;
            if (sigma.breakpoints[k] < hi && sigma.breakpoints[k + 1] > lo) {
                throw std::invalid_argument(
                    "epsilon oracle: test window overlaps a degenerate piece");
            }
        }
        const double slope = (at_b ? 1.0 : -1.0) / eps;
        // Composite Simpson on the window, split at interior breakpoints.
        auto integrand = [&](double x) {
            return sigma.value_at(x) * phi(p, sol.derivative(x)) * slope;
        };
        std::vector<double> cuts{lo};
        for (std::size_t k = 1; k < sigma.breakpoints.size() - 1; ++k) {
            const double bp = sigma.breakpoints[k];
            if (bp > lo && bp < hi) cuts.push_back(bp);
        }
        cuts.push_back(hi);
        double total = 0.0;
        constexpr int kPanels = 16;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double x0 = cuts[c], x1 = cuts[c + 1];
            const double h = (x1 - x0) / kPanels;
            double s = integrand(x0 + 1e-14 * (x1 - x0)) + integrand(x1 - 1e-14 * (x1 - x0));
            for (int i = 1; i < kPanels; ++i) {
                s += 2.0 * (1 + i % 2) * integrand(x0 + i * h);
            }
            total += s * h / 3.0;
        }
        return total;
    };
}

StrongFromWeakResult strong_from_weak_1d(const EpsilonPairingOracle& weak,
                                         std::span<const double> epsilon_schedule, double tol) {
    if (epsilon_schedule.size() < 2) {
        throw std::invalid_argument("strong_from_weak_1d: schedule needs at least 2 entries");
    }
    for (std::size_t i = 0; i + 1 < epsilon_schedule.size(); ++i) {
        if (!(epsilon_schedule[i] > epsilon_schedule[i + 1]) || !(epsilon_schedule[i + 1] > 0.0)) {
            throw std::invalid_argument("strong_from_weak_1d: schedule must decrease and stay > 0");
        }
    }

    StrongFromWeakResult result;
    for (double eps : epsilon_schedule) {
        result.values_at_a.push_back(weak(eps, false));
        result.values_at_b.push_back(weak(eps, true));
    }
    const std::size_t n = epsilon_schedule.size();
    const double db = std::abs(result.values_at_b[n - 1] - result.values_at_b[n - 2]);
    const double da = std::abs(result.values_at_a[n - 1] - result.values_at_a[n - 2]);
    const double scale =
        std::max({1.0, std::abs(result.values_at_a[n - 1]), std::abs(result.values_at_b[n - 1])});
    result.converged = (da <= tol * scale) && (db <= tol * scale);
    result.pair = {result.values_at_a[n - 1], result.values_at_b[n - 1]};
    return result;
}

}  // namespace pcond::oned
