#include "pshrink/estimators.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pshrink/error.h"

namespace pshrink {

namespace {

std::string format_g(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

ShrinkageFunction ShrinkageFunction::constant(double a) {
    return ShrinkageFunction{[a](double) { return a; }, [](double) { return 0.0; }, a, 0.0,
                             format_g("const(%.10g)", a)};
}

ShrinkageFunction ShrinkageFunction::capped_linear(double cap) {
    return ShrinkageFunction{[cap](double t) { return std::min(t, cap); },
                             [cap](double t) { return t < cap ? 1.0 : 0.0; }, cap, 1.0,
                             format_g("min(t,%.10g)", cap)};
}

ShrinkageFunction ShrinkageFunction::saturating(double a) {
    return ShrinkageFunction{[a](double t) { return a * t / (1.0 + t); },
                             [a](double t) { return a / ((1.0 + t) * (1.0 + t)); }, a, a,
                             format_g("sat(%.10g)", a)};
}

std::string estimator_label(const EstimatorSpec& spec) {
    struct Visitor {
        std::string operator()(const UsualEstimator&) const { return "usual"; }
        std::string operator()(const JamesStein& e) const { return format_g("js(a=%.10g)", e.a); }
        std::string operator()(const PositivePartJS& e) const {
            return format_g("js+(a=%.10g)", e.a);
        }
        std::string operator()(const Baranchik& e) const { return "baranchik(" + e.r.name + ")"; }
    };
    return std::visit(Visitor{}, spec);
}

void validate_estimator(const EstimatorSpec& spec) {
    auto check_a = [](double a) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw Error(ErrorKind::Validation,
                        "James-Stein constant must be finite and >= 0, got " + std::to_string(a));
        }
    };
    if (const auto* js = std::get_if<JamesStein>(&spec)) check_a(js->a);
    if (const auto* pp = std::get_if<PositivePartJS>(&spec)) check_a(pp->a);
    if (const auto* b = std::get_if<Baranchik>(&spec)) {
        if (!b->r.eval || !b->r.deriv) {
            throw Error(ErrorKind::Validation, "Baranchik shrinkage function is empty");
        }
    }
}

ShrinkageFunction equivalent_shrinkage(const EstimatorSpec& spec) {
    if (std::holds_alternative<UsualEstimator>(spec)) return ShrinkageFunction::constant(0.0);
    if (const auto* js = std::get_if<JamesStein>(&spec)) return ShrinkageFunction::constant(js->a);
    if (const auto* pp = std::get_if<PositivePartJS>(&spec)) {
        return ShrinkageFunction::capped_linear(pp->a);
    }
    return std::get<Baranchik>(spec).r;
}

bool is_degenerate_f(double f, const Vector& x, const PseudoinverseResult& pinv) {
    if (pinv.rank == 0) return true;
    const double lambda_max_pinv = 1.0 / pinv.min_retained;
    if (f <= 1e-12 * x.squaredNorm() * lambda_max_pinv) return true;
    return (pinv.projector.matrix() * x).squaredNorm() == 0.0;
}

EstimateOutput estimate(const EstimatorSpec& spec, const Vector& x,
                        const PseudoinverseResult& pinv) {
    if (x.size() != pinv.pinv.dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "estimate: x has length " + std::to_string(x.size()) + ", S has dimension " +
                        std::to_string(pinv.pinv.dim()));
    }
    EstimateOutput out;
    out.rank = pinv.rank;
    out.f_value = quad_form(x, pinv.pinv);
    out.delta = x;

    if (std::holds_alternative<UsualEstimator>(spec)) return out;
    if (is_degenerate_f(out.f_value, x, pinv)) {
        out.degenerate = true;
        return out;
    }

    const double f = out.f_value;
    const Vector ps_x = pinv.projector.matrix() * x;

    double r = 0.0;
    if (const auto* js = std::get_if<JamesStein>(&spec)) {
        r = js->a;
    } else if (const auto* b = std::get_if<Baranchik>(&spec)) {
        r = b->r(f);
    } else {
        const double a = std::get<PositivePartJS>(spec).a;
        if (1.0 - a / f < 0.0) {
            out.shrink_factor = 0.0;
            out.delta = pinv.complement.matrix() * x;
            return out;
        }
        // Same arithmetic as James-Stein so the two agree exactly here.
        r = a;
    }
    out.shrink_factor = 1.0 - r / f;
    out.delta = x - (r / f) * ps_x;
    return out;
}

EstimateOutput estimate(const EstimatorSpec& spec, const Vector& x, const SymMatrix& s,
                        std::optional<double> rel_tol) {
    if (x.size() != s.dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "estimate: x has length " + std::to_string(x.size()) + ", S has dimension " +
                        std::to_string(s.dim()));
    }
    validate_estimator(spec);
    return estimate(spec, x, pseudo_inverse(s, rel_tol.value_or(default_rel_tol(s.dim()))));
}

namespace {

void require_cutoff(int p, int n) {
    if (std::min(p, n) < 3) {
        throw Error(ErrorKind::DimensionCutoff,
                    "dimension cutoff: min(p, n) must be >= 3, got p=" + std::to_string(p) +
                        ", n=" + std::to_string(n));
    }
}

}  // namespace

double domination_bound(int p, int n) {
    require_cutoff(p, n);
    const int m = std::min(p, n);
    return 2.0 * (m - 2) / static_cast<double>(n + p - 2 * m + 3);
}

double js_default_constant(int p, int n) {
    require_cutoff(p, n);
    const int m = std::min(p, n);
    return (m - 2) / static_cast<double>(n + p - 2 * m + 3);
}

ConditionReport check_r_conditions(const ShrinkageFunction& r, int p, int n,
                                   std::vector<double> grid) {
    if (grid.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "check_r_conditions: grid needs >= 2 points");
    }
    for (double t : grid) {
        if (!(t >= 0.0)) {
            throw Error(ErrorKind::InvalidArgument,
                        "check_r_conditions: grid points must be nonnegative");
        }
    }
    std::sort(grid.begin(), grid.end());
    ConditionReport rep;
    rep.bound = domination_bound(p, n);
    rep.range_ok = rep.monotone_ok = rep.deriv_bounded_ok = true;
    double prev = r(grid.front());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = r(grid[i]);
        if (!(v >= 0.0 && v <= rep.bound)) rep.range_ok = false;
        if (i > 0 && v < prev - 1e-12) rep.monotone_ok = false;
        if (!(std::abs(r.deriv(grid[i])) <= r.deriv_bound)) rep.deriv_bounded_ok = false;
        prev = v;
    }
    return rep;
}

}  // namespace pshrink
