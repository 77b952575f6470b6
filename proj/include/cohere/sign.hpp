#pragma once

// Sign of an off-diagonal partial derivative over a box domain.
//
// Decision order: symbolic zero, then interval enclosure of the derivative
// (refined by bisection up to a box budget), then sign sampling on a
// deterministic grid plus seeded pseudorandom points. Infinite endpoints are
// clamped to +-kBigBox for the interval and sampling stages, so Plus/Minus
// verdicts on unbounded domains hold on the clamped box only.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cohere/interval.hpp"
#include "cohere/system.hpp"

namespace cohere {

enum class Sign { Zero, Plus, Minus, Theta };

std::string_view to_string(Sign s);

struct SignEvidence {
    enum class Kind {
        SymbolicZero,  // derivative simplified to the literal 0
        IntervalBound,  // enclosure with lo >= 0 (Plus) or hi <= 0 (Minus)
        Witnesses,  // two points with strictly opposite derivative signs
        Conservative,  // enclosure straddles 0, no witness pair found
        Failure,  // interval evaluation hit a domain error
    };
    Kind kind = Kind::SymbolicZero;
    Interval bound;  // tightest enclosure seen (IntervalBound / Conservative)
    std::vector<double> positive_point;
    std::vector<double> negative_point;
    double positive_value = 0.0;
    double negative_value = 0.0;
    int boxes = 0;  // interval boxes evaluated
    int samples = 0;  // sample points evaluated
    std::string note;
};

std::string_view to_string(SignEvidence::Kind k);

struct SignVerdict {
    Sign sign = Sign::Zero;
    SignEvidence evidence;

    bool conservative() const {
        return evidence.kind == SignEvidence::Kind::Conservative || evidence.kind == SignEvidence::Kind::Failure;
    }
};

struct SignOptions {
    double big_box = kBigBox;
    int grid_per_axis = 5;
    int grid_cap = 15625;  // 5^6
    int random_points = 256;
    std::uint64_t seed = 42;
    int max_boxes = 64;  // bisection budget for the interval stage
};

/// Label of the edge x_j -> F_i (0-based indices, i != j).
SignVerdict sign_of_partial(const SystemDef& s, int i, int j, const SignOptions& opts = {});

/// Sign of an arbitrary expression over a domain, same procedure.
SignVerdict sign_of_expr(const Expr& d, const DomainBox& domain, const SignOptions& opts = {});

/// The deterministic grid followed by the pseudorandom points, in the
/// closure of the clamped box.
std::vector<std::vector<double>> sample_points(const DomainBox& domain, const SignOptions& opts = {});

/// `count` seeded points inside the domain (open endpoints respected), each
/// coordinate drawn uniformly from the domain interval clipped to
/// [-radius, radius] around the point of the interval nearest 0.
std::vector<std::vector<double>> random_domain_points(const DomainBox& domain, int count, double radius,
                                                      std::uint64_t seed);

/// Portable splitmix-style generator, so sample sets are identical across
/// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t state_;
};

}  // namespace cohere
