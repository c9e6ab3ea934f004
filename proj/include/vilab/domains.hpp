#pragma once

// Feasible-set geometry: simplex, ball, box and Cartesian products thereof.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vilab/linalg.hpp"

namespace vilab {

enum class Norm { l1, l2, linf };

std::string to_string(Norm norm);
Norm parse_norm(const std::string& name);

class Domain;

/// Probability simplex Δ_d, living in d+1 coordinates.
struct Simplex {
  std::size_t d = 1;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

struct Box {
  Vector lower;
  Vector upper;
};

struct Product {
  std::vector<Domain> factors;
  /// offsets[i] is the first coordinate of factor i; offsets.back() == dim.
  std::vector<std::size_t> offsets;
};

/// Immutable convex compact set. Construct through the named factories, which
/// validate the variant invariants.
class Domain {
 public:
  using Variant = std::variant<Simplex, Ball, Box, Product>;

  static Domain simplex(std::size_t d);
  static Domain ball(Vector center, double radius);
  static Domain box(Vector lower, Vector upper);
  static Domain product(std::vector<Domain> factors);

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] const Variant& variant() const { return v_; }
  [[nodiscard]] std::string type_name() const;

  [[nodiscard]] bool is_product() const { return std::holds_alternative<Product>(v_); }
  /// Factors of a product domain; a non-product domain is its own single factor.
  [[nodiscard]] std::size_t factor_count() const;
  [[nodiscard]] const Domain& factor(std::size_t i) const;
  [[nodiscard]] std::size_t factor_offset(std::size_t i) const;
  [[nodiscard]] Vector block(const Vector& z, std::size_t i) const;

  /// Deterministic reference point: simplex barycenter, ball center, box midpoint.
  [[nodiscard]] Vector center() const;

 private:
  explicit Domain(Variant v, std::size_t dim) : v_(std::move(v)), dim_(dim) {}

  Variant v_;
  std::size_t dim_ = 0;
};

inline constexpr double kMembershipTol = 1e-9;
inline constexpr std::size_t kDefaultVertexCap = 20;

bool contains(const Domain& domain, const Vector& z, double tol = kMembershipTol);

/// Euclidean projection.
Vector project(const Domain& domain, const Vector& z);

double diameter(const Domain& domain, Norm norm);

/// argmin_{u ∈ Z} ⟨g, u⟩. Ties on the simplex resolve to the lowest index.
Vector linear_minimization_oracle(const Domain& domain, const Vector& g);

/// Extreme points of a simplex or box. Ball and product domains return nullopt.
/// Throws InvalidArgument ("vertex enumeration infeasible") when a box exceeds `cap` dims.
std::optional<std::vector<Vector>> vertices(const Domain& domain,
                                            std::size_t cap = kDefaultVertexCap);

/// max_{z ∈ Z} ‖z‖₂.
double max_norm(const Domain& domain);

/// Largest r such that the r-neighbourhood of z (within the simplex's affine
/// hull, for simplices) stays inside the set. Negative outside.
double interior_depth(const Domain& domain, const Vector& z);

/// Depth of the center; used as the natural length scale for interior tests.
double inradius(const Domain& domain);

/// Upper bound on N(Z, r, ‖·‖). Throws InvalidArgument for r ≤ 0 and
/// NumericalError when the count does not fit in 64 bits.
std::uint64_t covering_number_upper(const Domain& domain, double r, Norm norm);

/// Natural log of covering_number_upper, computed without overflow.
double log_covering_number_upper(const Domain& domain, double r, Norm norm);

/// The explicit grid cover behind the box bound (simplices use their bounding
/// box). Only for box and simplex domains.
std::vector<Vector> covering_points(const Domain& domain, double r, Norm norm);

Vector sample_uniform(const Domain& domain, std::uint64_t seed);

}  // namespace vilab
