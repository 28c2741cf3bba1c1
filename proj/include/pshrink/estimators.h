#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pshrink/linalg.h"

namespace pshrink {

/**
 * Scalar shrinkage function r(t) for the Baranchik-type estimator
 * (I - r(F) S S+ / F) X, with F = X' S+ X.
 *
 * `upper_bound` and `deriv_bound` are the constants C1 >= sup r and
 * C2 >= sup |r'| the caller vouches for; check_r_conditions tests them on a
 * grid.
 */
struct ShrinkageFunction {
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    double upper_bound = 0.0;
    double deriv_bound = 0.0;
    std::string name;

    double operator()(double t) const { return eval(t); }

    /// r(t) = a.
    static ShrinkageFunction constant(double a);
    /// r(t) = min(t, cap); r'(t) = 1 below the cap, 0 at and above it.
    static ShrinkageFunction capped_linear(double cap);
    /// r(t) = a t / (1 + t), smooth and increasing towards a.
    static ShrinkageFunction saturating(double a);
};

struct UsualEstimator {};
struct JamesStein {
    double a;
};
struct PositivePartJS {
    double a;
};
struct Baranchik {
    ShrinkageFunction r;
};

using EstimatorSpec = std::variant<UsualEstimator, JamesStein, PositivePartJS, Baranchik>;

/// Label used in CSV rows and legends, e.g. "usual", "js(a=0.375)".
std::string estimator_label(const EstimatorSpec& spec);
void validate_estimator(const EstimatorSpec& spec);

/**
 * The shrinkage function equivalent to a spec: 0 for the usual estimator,
 * a for James-Stein, min(a, t) for positive-part James-Stein (whose factor
 * (1 - a/F)_+ equals 1 - min(a, F)/F).
 */
ShrinkageFunction equivalent_shrinkage(const EstimatorSpec& spec);

struct EstimateOutput {
    Vector delta;
    double shrink_factor = 1.0;  // factor applied to P_S x
    double f_value = 0.0;        // F = x' S+ x
    Eigen::Index rank = 0;
    bool degenerate = false;     // F below threshold; delta = x
};

/// F is degenerate when F <= 1e-12 * |x|^2 * lambda_max(S+) or P_S x == 0.
bool is_degenerate_f(double f, const Vector& x, const PseudoinverseResult& pinv);

EstimateOutput estimate(const EstimatorSpec& spec, const Vector& x, const SymMatrix& s,
                        std::optional<double> rel_tol = std::nullopt);

/// Same, reusing a pseudoinverse of S computed by the caller.
EstimateOutput estimate(const EstimatorSpec& spec, const Vector& x,
                        const PseudoinverseResult& pinv);

/// Largest r allowed by the domination range: 2(m-2)/(n+p-2m+3), m = min(n,p).
/// Throws ErrorKind::DimensionCutoff when m < 3.
double domination_bound(int p, int n);

/// Midpoint of the domination range, (m-2)/(n+p-2m+3).
double js_default_constant(int p, int n);

struct ConditionReport {
    bool range_ok = false;
    bool monotone_ok = false;
    bool deriv_bounded_ok = false;
    double bound = 0.0;
    bool all() const { return range_ok && monotone_ok && deriv_bounded_ok; }
};

/// Range, monotonicity (tolerance 1e-12) and |r'| <= C2 on the sorted grid.
ConditionReport check_r_conditions(const ShrinkageFunction& r, int p, int n,
                                   std::vector<double> grid);

}  // namespace pshrink
