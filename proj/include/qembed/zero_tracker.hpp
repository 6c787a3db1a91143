#pragma once

// First zeros of u^{(j)} for solutions of the quartic equation, and the
// continuation in B that makes the first zeros of u' and u''' coincide.

#include "qembed/quartic_kernel.hpp"

#include <array>
#include <optional>
#include <vector>

namespace qembed {

struct ZeroLocation {
    int order = 0;
    std::optional<double> position;  // empty: no sign change before the horizon
    double horizon = 0.0;

    bool found() const { return position.has_value(); }
};

struct ScanOptions {
    // Scan resolution; <= 0 means (horizon - start)/4096.
    double scan_step = 0.0;
    // Absolute bracket width at which refinement stops (a Newton polish follows).
    double refine_tol = 1e-12;
    KernelConfig kernel{};
};

// First zero of u^{(j)} on (start.x, horizon]; `horizon` is an absolute x.
ZeroLocation first_zero(int order, const PiecewisePotential& pot, const StateVector4& start,
                        double horizon, double scan_step);
ZeroLocation first_zero(int order, const PiecewisePotential& pot, const StateVector4& start,
                        double horizon, const ScanOptions& opts);

// All four first zeros from a single scan.
std::array<ZeroLocation, 4> first_zeros(const PiecewisePotential& pot, const StateVector4& start,
                                        double horizon, const ScanOptions& opts);

// First zeros x3 < x2 < x1 < x0 of u''', u'', u', u for u'''' = -A u with an
// all-positive jet (absolute positions).
struct ZeroOrdering {
    double x3 = 0.0;
    double x2 = 0.0;
    double x1 = 0.0;
    double x0 = 0.0;
};

ZeroOrdering observation1_zeros(double A, const StateVector4& start, const ScanOptions& opts = {});

enum class RaceVerdict { z3_first, z1_first, tie_within_tol, undecided };

const char* to_string(RaceVerdict v);

// Outcome of comparing the first zeros of u' and u''' for u'''' = B u.
// Zero positions are measured from start.x.
struct RaceResult {
    RaceVerdict verdict = RaceVerdict::undecided;
    double B = 0.0;
    std::optional<double> z1;
    std::optional<double> z2;
    std::optional<double> z3;
    std::optional<double> z0;
    double span = 0.0;  // horizon actually scanned, from start.x
};

struct RaceOptions {
    // Scan length beyond start.x; empty selects 50 / max(1, B^{1/4}).
    std::optional<double> span;
    // Span doublings allowed while the verdict is undecided.
    int max_doublings = 4;
    // Tie when |z1 - z3| < tie_tol * max(1, z1).
    double tie_tol = 1e-10;
    ScanOptions scan{};
};

double default_race_span(double B);

// Requires the sign pattern u > 0, u' > 0, u'' < 0, u''' < 0 at start.
void check_race_start(const StateVector4& start);

RaceResult z_race(double B, const StateVector4& start, const RaceOptions& opts = {});

struct RegimeBounds {
    double B_sharp = 0.0;  // u' keeps its sign over the horizon, u''' vanishes
    double B_flat = 0.0;   // u''' keeps its sign over the horizon, u' vanishes
    // Whether gamma_1 + gamma_2 x + gamma_3 x^2/2 + B gamma_0 x^3/6 stays
    // positive on [0, span] at B_sharp (the integrated lower bound for u').
    bool cubic_bound_positive = false;
    double cubic_bound_min = 0.0;
};

RegimeBounds find_brackets(const StateVector4& start, const RaceOptions& opts = {});

// Minimum over [0, span] of the cubic lower bound for u' at parameter B.
double cubic_lower_bound_min(const StateVector4& start, double B, double span);

struct ContinuationBracket {
    double B_sharp = 0.0;
    double B_flat = 0.0;
    std::optional<double> B1;  // largest sampled B where u' still vanishes (z1 = z2 event)
    double B_star = 0.0;
    double z1 = 0.0;           // from start.x, at B_star
    double z3 = 0.0;
    double zeta = 0.0;         // common zero, absolute position
    std::vector<RaceResult> trajectory;  // bisection samples in evaluation order
};

ContinuationBracket find_B_star(const StateVector4& start, const RaceOptions& opts = {});

struct SensitivitySigns {
    double B = 0.0;
    double z1 = 0.0;
    double z3 = 0.0;
    double dz1_dB = 0.0;
    double dz3_dB = 0.0;
};

SensitivitySigns zero_sensitivities(double B, const StateVector4& start,
                                    const RaceOptions& opts = {});

}  // namespace qembed
