#include "qembed/zero_tracker.hpp"

#include "qembed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qembed {

namespace {

constexpr int kDefaultScanPoints = 4096;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double scan_step_for(const ScanOptions& opts, double length) {
    return opts.scan_step > 0.0 ? opts.scan_step : length / kDefaultScanPoints;
}

// Derivative of u^{(order)} at a state, closing u'''' = -value u.
double next_derivative(int order, const StateVector4& s, double value) {
    return order < 3 ? s[order + 1] : -value * s.u;
}

// Shrinks [left.x, right_x] around a sign change of u^{(order)}, then takes one
// Newton step if it lands inside the final bracket.
double refine_zero(int order, const PiecewisePotential& pot, StateVector4 left, double right_x,
                   const ScanOptions& opts) {
    const int left_sign = sign_of(left[order]);
    while (right_x - left.x > opts.refine_tol) {
        const double mid = 0.5 * (left.x + right_x);
        if (mid <= left.x || mid >= right_x) break;
        const StateVector4 s = propagate(pot, left, mid, opts.kernel);
        const int sm = sign_of(s[order]);
        if (sm == 0) return mid;
        if (sm == left_sign) {
            left = s;
        } else {
            right_x = mid;
        }
    }
    const double slope = next_derivative(order, left, pot.value_at(left.x));
    if (slope != 0.0) {
        const double newton = left.x - left[order] / slope;
        if (newton >= left.x && newton <= right_x) return newton;
    }
    return 0.5 * (left.x + right_x);
}

std::array<ZeroLocation, 4> scan(const PiecewisePotential& pot, const StateVector4& start,
                                 double horizon, const ScanOptions& opts,
                                 const std::array<bool, 4>& wanted) {
    if (!(horizon > start.x)) throw DomainError("zero scan: horizon must exceed the start point");
    std::array<ZeroLocation, 4> out;
    std::array<int, 4> signs{};
    std::array<bool, 4> done{};
    for (int j = 0; j < 4; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        out[uj].order = j;
        out[uj].horizon = horizon;
        signs[uj] = sign_of(start[j]);
        done[uj] = !wanted[uj];
    }
    const double step = scan_step_for(opts, horizon - start.x);
    StateVector4 prev = start;
    for (long k = 1;; ++k) {
        if (std::all_of(done.begin(), done.end(), [](bool d) { return d; })) break;
        const double x = std::min(start.x + static_cast<double>(k) * step, horizon);
        const StateVector4 cur = propagate(pot, prev, x, opts.kernel);
        for (int j = 0; j < 4; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            if (done[uj]) continue;
            const int s = sign_of(cur[j]);
            if (signs[uj] == 0) {
                // zero at the start point does not count
                signs[uj] = s;
                continue;
            }
            if (s == 0) {
                out[uj].position = x;
                done[uj] = true;
            } else if (s != signs[uj]) {
                out[uj].position = refine_zero(j, pot, prev, x, opts);
                done[uj] = true;
            }
        }
        prev = cur;
        if (x >= horizon) break;
    }
    return out;
}

}  // namespace

ZeroLocation first_zero(int order, const PiecewisePotential& pot, const StateVector4& start,
                        double horizon, double scan_step) {
    ScanOptions opts;
    opts.scan_step = scan_step;
    return first_zero(order, pot, start, horizon, opts);
}

ZeroLocation first_zero(int order, const PiecewisePotential& pot, const StateVector4& start,
                        double horizon, const ScanOptions& opts) {
    if (order < 0 || order > 3) throw DomainError("first_zero: order must be in 0..3");
    std::array<bool, 4> wanted{};
    wanted[static_cast<std::size_t>(order)] = true;
    return scan(pot, start, horizon, opts, wanted)[static_cast<std::size_t>(order)];
}

std::array<ZeroLocation, 4> first_zeros(const PiecewisePotential& pot, const StateVector4& start,
                                        double horizon, const ScanOptions& opts) {
    return scan(pot, start, horizon, opts, {true, true, true, true});
}

ZeroOrdering observation1_zeros(double A, const StateVector4& start, const ScanOptions& opts) {
    if (!(A > 0.0)) throw DomainError("observation1_zeros: A must be positive");
    if (!(start.u > 0.0 && start.u1 > 0.0 && start.u2 > 0.0 && start.u3 > 0.0)) {
        throw DomainError("observation1_zeros: all four jet components must be positive");
    }
    const auto pot = PiecewisePotential::constant(A);
    double span = 50.0 / std::max(1.0, std::sqrt(std::sqrt(A)));
    std::array<ZeroLocation, 4> z;
    for (int attempt = 0; attempt <= 4; ++attempt, span *= 2.0) {
        z = first_zeros(pot, start, start.x + span, opts);
        if (std::all_of(z.begin(), z.end(), [](const ZeroLocation& l) { return l.found(); })) break;
    }
    for (const auto& l : z) {
        if (!l.found()) {
            throw HorizonError("observation1_zeros: zero of order " + std::to_string(l.order) +
                               " not found within the enlarged horizon");
        }
    }
    ZeroOrdering out{*z[3].position, *z[2].position, *z[1].position, *z[0].position};
    if (!(start.x < out.x3 && out.x3 < out.x2 && out.x2 < out.x1 && out.x1 < out.x0)) {
        std::ostringstream os;
        os.precision(17);
        os << "observation1_zeros: ordering violated (x3, x2, x1, x0) = (" << out.x3 << ", "
           << out.x2 << ", " << out.x1 << ", " << out.x0 << ")";
        throw ConsistencyError(os.str());
    }
    return out;
}

const char* to_string(RaceVerdict v) {
    switch (v) {
        case RaceVerdict::z3_first: return "Z3_FIRST";
        case RaceVerdict::z1_first: return "Z1_FIRST";
        case RaceVerdict::tie_within_tol: return "TIE_WITHIN_TOL";
        case RaceVerdict::undecided: return "UNDECIDED";
    }
    return "UNDECIDED";
}

double default_race_span(double B) { return 50.0 / std::max(1.0, std::sqrt(std::sqrt(B))); }

void check_race_start(const StateVector4& start) {
    if (!(start.u > 0.0 && start.u1 > 0.0 && start.u2 < 0.0 && start.u3 < 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "start jet must satisfy u > 0, u' > 0, u'' < 0, u''' < 0; got (" << start.u << ", "
           << start.u1 << ", " << start.u2 << ", " << start.u3 << ")";
        throw DomainError(os.str());
    }
}

RaceResult z_race(double B, const StateVector4& start, const RaceOptions& opts) {
    if (!(B > 0.0) || !std::isfinite(B)) throw DomainError("z_race: B must be positive");
    check_race_start(start);
    const auto pot = PiecewisePotential::constant(-B);
    RaceResult r;
    r.B = B;
    double span = opts.span.value_or(default_race_span(B));
    for (int attempt = 0; attempt <= opts.max_doublings; ++attempt, span *= 2.0) {
        const auto z = first_zeros(pot, start, start.x + span, opts.scan);
        auto rel = [&](const ZeroLocation& l) -> std::optional<double> {
            if (!l.found()) return std::nullopt;
            return *l.position - start.x;
        };
        r.z0 = rel(z[0]);
        r.z1 = rel(z[1]);
        r.z2 = rel(z[2]);
        r.z3 = rel(z[3]);
        r.span = span;
        if (r.z1 || r.z3) break;
    }
    if (r.z1 && r.z3) {
        if (std::abs(*r.z1 - *r.z3) < opts.tie_tol * std::max(1.0, *r.z1)) {
            r.verdict = RaceVerdict::tie_within_tol;
        } else {
            r.verdict = *r.z3 < *r.z1 ? RaceVerdict::z3_first : RaceVerdict::z1_first;
        }
    } else if (r.z3) {
        r.verdict = RaceVerdict::z3_first;
    } else if (r.z1) {
        r.verdict = RaceVerdict::z1_first;
    } else {
        r.verdict = RaceVerdict::undecided;
    }
    return r;
}

double cubic_lower_bound_min(const StateVector4& start, double B, double span) {
    const double g0 = start.u, g1 = start.u1, g2 = start.u2, g3 = start.u3;
    auto f = [&](double x) { return g1 + g2 * x + 0.5 * g3 * x * x + B * g0 * x * x * x / 6.0; };
    double best = std::min(f(0.0), f(span));
    // f'(x) = g2 + g3 x + (B g0 / 2) x^2
    const double qa = 0.5 * B * g0, qb = g3, qc = g2;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (qa != 0.0 && disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double x : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
            if (x > 0.0 && x < span) best = std::min(best, f(x));
        }
    }
    return best;
}

RegimeBounds find_brackets(const StateVector4& start, const RaceOptions& opts) {
    check_race_start(start);
    constexpr int kMaxIterations = 60;
    RegimeBounds out;

    double B = 1.0;
    bool found = false;
    for (int it = 0; it < kMaxIterations; ++it, B *= 2.0) {
        const RaceResult r = z_race(B, start, opts);
        if (r.verdict == RaceVerdict::z3_first && !r.z1) {
            found = true;
            break;
        }
    }
    if (!found) throw BracketError("find_brackets: no B with u' of one sign after 60 doublings");
    out.B_sharp = B;

    B = 1.0;
    found = false;
    for (int it = 0; it < kMaxIterations; ++it, B *= 0.5) {
        const RaceResult r = z_race(B, start, opts);
        if (r.verdict == RaceVerdict::z1_first && !r.z3) {
            found = true;
            break;
        }
    }
    if (!found) throw BracketError("find_brackets: no B with u''' of one sign after 60 halvings");
    out.B_flat = B;

    const double span = opts.span.value_or(default_race_span(out.B_sharp));
    out.cubic_bound_min = cubic_lower_bound_min(start, out.B_sharp, span);
    out.cubic_bound_positive = out.cubic_bound_min > 0.0;
    return out;
}

namespace {

// Largest sampled B at which u' still vanishes, refined against the smallest
// sampled B at which it does not.
std::optional<double> locate_B1(const StateVector4& start, const ContinuationBracket& br,
                                const RaceOptions& opts) {
    double lo = br.B_star;
    double hi = br.B_sharp;
    for (const auto& r : br.trajectory) {
        if (r.z1 && r.B > lo) lo = r.B;
        if (!r.z1 && r.B < hi) hi = r.B;
    }
    if (!(lo < hi)) return std::nullopt;
    for (int it = 0; it < 60 && hi / lo - 1.0 > 1e-12; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (z_race(mid, start, opts).z1) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace

ContinuationBracket find_B_star(const StateVector4& start, const RaceOptions& opts) {
    const RegimeBounds bounds = find_brackets(start, opts);
    ContinuationBracket br;
    br.B_sharp = bounds.B_sharp;
    br.B_flat = bounds.B_flat;

    double lo = bounds.B_flat;   // Z1_FIRST
    double hi = bounds.B_sharp;  // Z3_FIRST
    std::optional<RaceResult> tie;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi)) break;
        RaceResult r = z_race(mid, start, opts);
        br.trajectory.push_back(r);
        if (r.verdict == RaceVerdict::tie_within_tol) {
            tie = r;
            break;
        }
        if (r.verdict == RaceVerdict::undecided) {
            std::ostringstream os;
            os << "find_B_star: neither u' nor u''' vanishes within the horizon at B = " << mid
               << "; enlarge the horizon";
            throw HorizonError(os.str());
        }
        if (r.verdict == RaceVerdict::z3_first) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if (!tie) {
        std::ostringstream os;
        os.precision(17);
        os << "find_B_star: the race verdict flips at B = " << lo
           << " without z1 = z3; the zeros jump there";
        throw ConsistencyError(os.str());
    }
    br.B_star = tie->B;
    br.z1 = *tie->z1;
    br.z3 = *tie->z3;
    br.zeta = start.x + br.z1;
    try {
        br.B1 = locate_B1(start, br, opts);
    } catch (const NumericalError&) {
        br.B1.reset();
    }
    return br;
}

SensitivitySigns zero_sensitivities(double B, const StateVector4& start, const RaceOptions& opts) {
    const RaceResult r = z_race(B, start, opts);
    if (!r.z1 || !r.z3) {
        throw DomainError("zero_sensitivities: z1 and z3 must both be finite at this B");
    }
    const double x1 = start.x + *r.z1;
    const double x3 = start.x + *r.z3;
    const KernelConfig& kcfg = opts.scan.kernel;
    const StateVector4 s1 = propagate_constant(B, start, x1, kcfg);
    const StateVector4 s3 = propagate_constant(B, start, x3, kcfg);
    if (std::abs(s1.u2) < 1e-12 || std::abs(s3.u) < 1e-12) {
        throw DegenerateZeroError("zero_sensitivities: u''(z1) or u(z3) vanishes; zero is not simple");
    }
    const double d1 = db_propagate(B, start, x1, kcfg).dB_u1;
    const double d3 = db_propagate(B, start, x3, kcfg).dB_u3;
    SensitivitySigns out;
    out.B = B;
    out.z1 = *r.z1;
    out.z3 = *r.z3;
    out.dz1_dB = -d1 / s1.u2;
    out.dz3_dB = -d3 / (B * s3.u);
    return out;
}

}  // namespace qembed
