#include "vilab/domains.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "vilab/errors.hpp"
#include "vilab/rng.hpp"

namespace vilab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(const Domain& domain, const Vector& z, const char* what) {
  if (static_cast<std::size_t>(z.size()) != domain.dim()) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (domain " +
                          std::to_string(domain.dim()) + ", point " +
                          std::to_string(z.size()) + ")");
  }
}

// Sort-based Euclidean projection onto {x ≥ 0, Σx = 1}.
Vector project_simplex(const Vector& z) {
  std::vector<double> sorted(z.data(), z.data() + z.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  return (z.array() - theta).max(0.0).matrix();
}

// Per-axis cell count so that a cell of side width/count has radius ≤ r.
std::uint64_t axis_cells(double width, double r, Norm norm, std::size_t n) {
  double scale = 1.0;
  if (norm == Norm::l2) scale = std::sqrt(static_cast<double>(n));
  if (norm == Norm::l1) scale = static_cast<double>(n);
  const double x = width * scale / (2.0 * r);
  const double nearest = std::round(x);
  const double cells = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return static_cast<std::uint64_t>(std::max(1.0, cells));
}

struct BoxView {
  Vector lower;
  Vector upper;
};

BoxView bounding_box(const Domain& domain) {
  if (const auto* s = std::get_if<Simplex>(&domain.variant())) {
    return {Vector::Zero(static_cast<Eigen::Index>(s->d + 1)),
            Vector::Ones(static_cast<Eigen::Index>(s->d + 1))};
  }
  const auto& b = std::get<Box>(domain.variant());
  return {b.lower, b.upper};
}

}  // namespace

std::string to_string(Norm norm) {
  switch (norm) {
    case Norm::l1: return "l1";
    case Norm::l2: return "l2";
    case Norm::linf: return "linf";
  }
  return "l2";
}

Norm parse_norm(const std::string& name) {
  if (name == "l1") return Norm::l1;
  if (name == "l2") return Norm::l2;
  if (name == "linf") return Norm::linf;
  throw InvalidArgument("unknown norm '" + name + "'");
}

Domain Domain::simplex(std::size_t d) {
  if (d < 1) throw InvalidArgument("simplex: d must be positive");
  return Domain(Simplex{d}, d + 1);
}

Domain Domain::ball(Vector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball: radius must be > 0");
  if (center.size() == 0) throw InvalidArgument("ball: empty center");
  if (!center.allFinite()) throw InvalidArgument("ball: non-finite center");
  const auto n = static_cast<std::size_t>(center.size());
  return Domain(Ball{std::move(center), radius}, n);
}

Domain Domain::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw InvalidArgument("box: lower/upper must be nonempty and of equal length");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower(i)) || !std::isfinite(upper(i)) || !(lower(i) < upper(i))) {
      throw InvalidArgument("box: requires lower[i] < upper[i] (violated at index " +
                            std::to_string(i) + ")");
    }
  }
  const auto n = static_cast<std::size_t>(lower.size());
  return Domain(Box{std::move(lower), std::move(upper)}, n);
}

Domain Domain::product(std::vector<Domain> factors) {
  if (factors.empty()) throw InvalidArgument("product: needs at least one factor");
  std::vector<std::size_t> offsets{0};
  for (const auto& f : factors) offsets.push_back(offsets.back() + f.dim());
  const std::size_t n = offsets.back();
  return Domain(Product{std::move(factors), std::move(offsets)}, n);
}

std::string Domain::type_name() const {
  return std::visit(Overloaded{[](const Simplex&) { return std::string("simplex"); },
                               [](const Ball&) { return std::string("ball"); },
                               [](const Box&) { return std::string("box"); },
                               [](const Product&) { return std::string("product"); }},
                    v_);
}

std::size_t Domain::factor_count() const {
  if (const auto* p = std::get_if<Product>(&v_)) return p->factors.size();
  return 1;
}

const Domain& Domain::factor(std::size_t i) const {
  if (const auto* p = std::get_if<Product>(&v_)) {
    if (i >= p->factors.size()) throw InvalidArgument("factor index out of range");
    return p->factors[i];
  }
  if (i != 0) throw InvalidArgument("factor index out of range");
  return *this;
}

std::size_t Domain::factor_offset(std::size_t i) const {
  if (const auto* p = std::get_if<Product>(&v_)) {
    if (i > p->factors.size()) throw InvalidArgument("factor index out of range");
    return p->offsets[i];
  }
  if (i > 1) throw InvalidArgument("factor index out of range");
  return i == 0 ? 0 : dim_;
}

Vector Domain::block(const Vector& z, std::size_t i) const {
  const auto lo = static_cast<Eigen::Index>(factor_offset(i));
  const auto hi = static_cast<Eigen::Index>(factor_offset(i + 1));
  return z.segment(lo, hi - lo);
}

Vector Domain::center() const {
  return std::visit(
      Overloaded{[](const Simplex& s) {
                   const auto n = static_cast<Eigen::Index>(s.d + 1);
                   return Vector(Vector::Constant(n, 1.0 / static_cast<double>(n)));
                 },
                 [](const Ball& b) { return b.center; },
                 [](const Box& b) { return Vector(0.5 * (b.lower + b.upper)); },
                 [this](const Product& p) {
                   Vector out(static_cast<Eigen::Index>(dim_));
                   for (std::size_t i = 0; i < p.factors.size(); ++i) {
                     out.segment(static_cast<Eigen::Index>(p.offsets[i]),
                                 static_cast<Eigen::Index>(p.factors[i].dim())) =
                         p.factors[i].center();
                   }
                   return out;
                 }},
      v_);
}

Vector project(const Domain& domain, const Vector& z) {
  require_dim(domain, z, "project");
  return std::visit(
      Overloaded{[&](const Simplex&) { return project_simplex(z); },
                 [&](const Ball& b) {
                   const Vector diff = z - b.center;
                   const double norm = diff.norm();
                   if (norm <= b.radius) return z;
                   return Vector(b.center + diff * (b.radius / norm));
                 },
                 [&](const Box& b) { return Vector(z.cwiseMax(b.lower).cwiseMin(b.upper)); },
                 [&](const Product& p) {
                   Vector out(z.size());
                   for (std::size_t i = 0; i < p.factors.size(); ++i) {
                     const auto off = static_cast<Eigen::Index>(p.offsets[i]);
                     const auto len = static_cast<Eigen::Index>(p.factors[i].dim());
                     out.segment(off, len) = project(p.factors[i], z.segment(off, len));
                   }
                   return out;
                 }},
      domain.variant());
}

bool contains(const Domain& domain, const Vector& z, double tol) {
  require_dim(domain, z, "contains");
  if (!z.allFinite()) return false;
  return (project(domain, z) - z).norm() <= tol;
}

double diameter(const Domain& domain, Norm norm) {
  return std::visit(
      Overloaded{[&](const Simplex&) -> double {
                   switch (norm) {
                     case Norm::l1: return 2.0;
                     case Norm::l2: return std::sqrt(2.0);
                     case Norm::linf: return 1.0;
                   }
                   return 0.0;
                 },
                 [&](const Ball& b) -> double {
                   const double n = static_cast<double>(b.center.size());
                   switch (norm) {
                     case Norm::l2: return 2.0 * b.radius;
                     case Norm::l1: return 2.0 * b.radius * std::sqrt(n);
                     case Norm::linf: return 2.0 * b.radius;
                   }
                   return 0.0;
                 },
                 [&](const Box& b) -> double {
                   const Vector w = b.upper - b.lower;
                   switch (norm) {
                     case Norm::l1: return w.sum();
                     case Norm::l2: return w.norm();
                     case Norm::linf: return w.maxCoeff();
                   }
                   return 0.0;
                 },
                 [&](const Product& p) -> double {
                   double acc = 0.0;
                   for (const auto& f : p.factors) {
                     const double df = diameter(f, norm);
                     switch (norm) {
                       case Norm::l1: acc += df; break;
                       case Norm::l2: acc += df * df; break;
                       case Norm::linf: acc = std::max(acc, df); break;
                     }
                   }
                   return norm == Norm::l2 ? std::sqrt(acc) : acc;
                 }},
      domain.variant());
}

Vector linear_minimization_oracle(const Domain& domain, const Vector& g) {
  require_dim(domain, g, "linear_minimization_oracle");
  return std::visit(
      Overloaded{[&](const Simplex&) {
                   Eigen::Index best = 0;
                   for (Eigen::Index i = 1; i < g.size(); ++i) {
                     if (g(i) < g(best)) best = i;
                   }
                   Vector e = Vector::Zero(g.size());
                   e(best) = 1.0;
                   return e;
                 },
                 [&](const Ball& b) {
                   const double norm = g.norm();
                   if (norm == 0.0) return b.center;
                   return Vector(b.center - (b.radius / norm) * g);
                 },
                 [&](const Box& b) {
                   Vector u(g.size());
                   for (Eigen::Index i = 0; i < g.size(); ++i) {
                     u(i) = g(i) > 0.0 ? b.lower(i) : (g(i) < 0.0 ? b.upper(i) : b.lower(i));
                   }
                   return u;
                 },
                 [&](const Product& p) {
                   Vector u(g.size());
                   for (std::size_t i = 0; i < p.factors.size(); ++i) {
                     const auto off = static_cast<Eigen::Index>(p.offsets[i]);
                     const auto len = static_cast<Eigen::Index>(p.factors[i].dim());
                     u.segment(off, len) = linear_minimization_oracle(p.factors[i], g.segment(off, len));
                   }
                   return u;
                 }},
      domain.variant());
}

std::optional<std::vector<Vector>> vertices(const Domain& domain, std::size_t cap) {
  if (const auto* s = std::get_if<Simplex>(&domain.variant())) {
    std::vector<Vector> out;
    const auto n = static_cast<Eigen::Index>(s->d + 1);
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(Vector::Unit(n, i));
    return out;
  }
  if (const auto* b = std::get_if<Box>(&domain.variant())) {
    const auto n = static_cast<std::size_t>(b->lower.size());
    if (n > cap || n >= 63) {
      throw InvalidArgument("vertex enumeration infeasible: box dimension " + std::to_string(n) +
                            " exceeds cap " + std::to_string(cap));
    }
    std::vector<Vector> out;
    const std::uint64_t count = std::uint64_t{1} << n;
    out.reserve(count);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      Vector v(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        v(idx) = ((mask >> i) & 1U) ? b->upper(idx) : b->lower(idx);
      }
      out.push_back(std::move(v));
    }
    return out;
  }
  return std::nullopt;
}

double max_norm(const Domain& domain) {
  return std::visit(
      Overloaded{[](const Simplex&) { return 1.0; },
                 [](const Ball& b) { return b.center.norm() + b.radius; },
                 [](const Box& b) {
                   // ‖·‖² is separable, so the farthest corner is chosen per axis.
                   return b.lower.cwiseAbs().cwiseMax(b.upper.cwiseAbs()).norm();
                 },
                 [](const Product& p) {
                   double acc = 0.0;
                   for (const auto& f : p.factors) acc += std::pow(max_norm(f), 2);
                   return std::sqrt(acc);
                 }},
      domain.variant());
}

double interior_depth(const Domain& domain, const Vector& z) {
  require_dim(domain, z, "interior_depth");
  return std::visit(
      Overloaded{[&](const Simplex& s) {
                   const double off_hull = std::abs(z.sum() - 1.0);
                   if (off_hull > kMembershipTol) return -off_hull;
                   const double d = static_cast<double>(s.d);
                   return z.minCoeff() * std::sqrt((d + 1.0) / d);
                 },
                 [&](const Ball& b) { return b.radius - (z - b.center).norm(); },
                 [&](const Box& b) {
                   return std::min((z - b.lower).minCoeff(), (b.upper - z).minCoeff());
                 },
                 [&](const Product& p) {
                   double depth = std::numeric_limits<double>::infinity();
                   for (std::size_t i = 0; i < p.factors.size(); ++i) {
                     depth = std::min(depth, interior_depth(p.factors[i], domain.block(z, i)));
                   }
                   return depth;
                 }},
      domain.variant());
}

double inradius(const Domain& domain) { return interior_depth(domain, domain.center()); }

double log_covering_number_upper(const Domain& domain, double r, Norm norm) {
  if (!(r > 0.0)) throw InvalidArgument("covering number: r must be > 0");
  return std::visit(
      Overloaded{[&](const Ball& b) {
                   const double n = static_cast<double>(b.center.size());
                   const double scale = norm == Norm::l1 ? std::sqrt(n) : 1.0;
                   return n * std::log(std::ceil(1.0 + 2.0 * b.radius * scale / r));
                 },
                 [&](const Product& p) {
                   const double k = static_cast<double>(p.factors.size());
                   double rf = r;
                   if (norm == Norm::l2) rf = r / std::sqrt(k);
                   if (norm == Norm::l1) rf = r / k;
                   double acc = 0.0;
                   for (const auto& f : p.factors) acc += log_covering_number_upper(f, rf, norm);
                   return acc;
                 },
                 [&](const auto&) {
                   const BoxView bb = bounding_box(domain);
                   const auto n = static_cast<std::size_t>(bb.lower.size());
                   double acc = 0.0;
                   for (Eigen::Index i = 0; i < bb.lower.size(); ++i) {
                     acc += std::log(static_cast<double>(
                         axis_cells(bb.upper(i) - bb.lower(i), r, norm, n)));
                   }
                   return acc;
                 }},
      domain.variant());
}

std::uint64_t covering_number_upper(const Domain& domain, double r, Norm norm) {
  const double log_n = log_covering_number_upper(domain, r, norm);
  if (log_n >= 63.0 * std::log(2.0)) {
    throw NumericalError("covering number exceeds 64-bit range (log N = " + std::to_string(log_n) + ")");
  }
  return std::visit(
      Overloaded{[&](const Ball& b) {
                   const double n = static_cast<double>(b.center.size());
                   const double scale = norm == Norm::l1 ? std::sqrt(n) : 1.0;
                   const auto per = static_cast<std::uint64_t>(std::ceil(1.0 + 2.0 * b.radius * scale / r));
                   std::uint64_t out = 1;
                   for (Eigen::Index i = 0; i < b.center.size(); ++i) out *= per;
                   return out;
                 },
                 [&](const Product& p) {
                   const double k = static_cast<double>(p.factors.size());
                   double rf = r;
                   if (norm == Norm::l2) rf = r / std::sqrt(k);
                   if (norm == Norm::l1) rf = r / k;
                   std::uint64_t out = 1;
                   for (const auto& f : p.factors) out *= covering_number_upper(f, rf, norm);
                   return out;
                 },
                 [&](const auto&) {
                   const BoxView bb = bounding_box(domain);
                   const auto n = static_cast<std::size_t>(bb.lower.size());
                   std::uint64_t out = 1;
                   for (Eigen::Index i = 0; i < bb.lower.size(); ++i) {
                     out *= axis_cells(bb.upper(i) - bb.lower(i), r, norm, n);
                   }
                   return out;
                 }},
      domain.variant());
}

std::vector<Vector> covering_points(const Domain& domain, double r, Norm norm) {
  if (!(r > 0.0)) throw InvalidArgument("covering points: r must be > 0");
  if (!std::holds_alternative<Box>(domain.variant()) &&
      !std::holds_alternative<Simplex>(domain.variant())) {
    throw InvalidArgument("covering points: only box and simplex domains are supported");
  }
  const BoxView bb = bounding_box(domain);
  const auto n = static_cast<std::size_t>(bb.lower.size());
  std::vector<std::uint64_t> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    cells[i] = axis_cells(bb.upper(idx) - bb.lower(idx), r, norm, n);
  }
  std::vector<Vector> out;
  std::vector<std::uint64_t> counter(n, 0);
  while (true) {
    Vector p(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      const double side = (bb.upper(idx) - bb.lower(idx)) / static_cast<double>(cells[i]);
      p(idx) = bb.lower(idx) + side * (static_cast<double>(counter[i]) + 0.5);
    }
    out.push_back(std::move(p));
    std::size_t axis = 0;
    while (axis < n && ++counter[axis] == cells[axis]) counter[axis++] = 0;
    if (axis == n) break;
  }
  return out;
}

Vector sample_uniform(const Domain& domain, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x5a3b1e}));
  return std::visit(
      Overloaded{[&](const Simplex& s) {
                   std::exponential_distribution<double> expo(1.0);
                   Vector z(static_cast<Eigen::Index>(s.d + 1));
                   for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = expo(rng);
                   return Vector(z / z.sum());
                 },
                 [&](const Ball& b) {
                   std::normal_distribution<double> normal(0.0, 1.0);
                   std::uniform_real_distribution<double> unif(0.0, 1.0);
                   Vector dir(b.center.size());
                   do {
                     for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = normal(rng);
                   } while (dir.norm() == 0.0);
                   const double radius =
                       b.radius * std::pow(unif(rng), 1.0 / static_cast<double>(dir.size()));
                   return Vector(b.center + dir.normalized() * radius);
                 },
                 [&](const Box& b) {
                   Vector z(b.lower.size());
                   for (Eigen::Index i = 0; i < z.size(); ++i) {
                     std::uniform_real_distribution<double> unif(b.lower(i), b.upper(i));
                     z(i) = unif(rng);
                   }
                   return z;
                 },
                 [&](const Product& p) {
                   Vector z(static_cast<Eigen::Index>(domain.dim()));
                   for (std::size_t i = 0; i < p.factors.size(); ++i) {
                     z.segment(static_cast<Eigen::Index>(p.offsets[i]),
                               static_cast<Eigen::Index>(p.factors[i].dim())) =
                         sample_uniform(p.factors[i], derive_seed({seed, i + 1}));
                   }
                   return z;
                 }},
      domain.variant());
}

}  // namespace vilab
