#pragma once

#include <compare>
#include <cstdlib>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace qp {

// Point of (1/2)Z^d. Coordinates are stored doubled so half-integer
// arithmetic stays exact.
struct Site {
  std::vector<int> twice;

  Site() = default;
  explicit Site(std::vector<int> doubled) : twice(std::move(doubled)) {}

  static Site integer(const std::vector<int>& x);
  static Site zero(int d) { return Site(std::vector<int>(d, 0)); }

  int dim() const { return static_cast<int>(twice.size()); }
  bool is_integer() const;
  double coord(int i) const { return 0.5 * twice[i]; }
  Eigen::VectorXd coords() const;

  auto operator<=>(const Site&) const = default;
};

Site operator+(const Site& a, const Site& b);
Site operator-(const Site& a, const Site& b);
Site operator-(const Site& a);

// 2*||a|| in the sup norm (an exact integer).
int sup_twice(const Site& a);
inline double sup_norm(const Site& a) { return 0.5 * sup_twice(a); }
// n . omega for a (possibly half-integer) site.
double dot(const Site& n, const Eigen::VectorXd& omega);

// Finite set of sites in canonical lexicographic order, duplicates removed.
class SiteSet {
public:
  SiteSet() = default;
  explicit SiteSet(std::vector<Site> members, std::optional<Site> center = std::nullopt);

  std::size_t size() const { return m_.size(); }
  bool empty() const { return m_.empty(); }
  int dim() const { return m_.empty() ? (center ? center->dim() : 0) : m_.front().dim(); }
  const Site& operator[](std::size_t i) const { return m_[i]; }
  const std::vector<Site>& members() const { return m_; }
  auto begin() const { return m_.begin(); }
  auto end() const { return m_.end(); }

  bool contains(const Site& s) const;
  // Position in canonical order, or -1.
  long index_of(const Site& s) const;
  bool subset_of(const SiteSet& other) const;
  bool intersects(const SiteSet& other) const;

  SiteSet translated(const Site& shift) const;
  SiteSet negated() const;
  // s in set <=> 2c - s in set
  bool symmetric_about(const Site& c) const;

  bool operator==(const SiteSet& o) const { return m_ == o.m_; }

  std::optional<Site> center;

private:
  std::vector<Site> m_;
};

SiteSet set_union(const SiteSet& a, const SiteSet& b);
SiteSet set_difference(const SiteSet& a, const SiteSet& b);
SiteSet set_intersection(const SiteSet& a, const SiteSet& b);

// Integer sites within sup distance `radius` of `center`.
SiteSet box(const Site& center, int radius);
// Sites of the coset center + Z^d within sup distance `radius` of `center`.
SiteSet coset_box(const Site& center, int radius);

struct Metrics {
  double dist;
  double diam_a;
};

Metrics metrics(const SiteSet& a, const SiteSet& b);
double dist(const SiteSet& a, const SiteSet& b);
double dist(const Site& a, const SiteSet& b);
double diam(const SiteSet& a);

struct Block {
  SiteSet set;
  int generation = 0;
};

// Least superset of `base` that, for every block B, either contains B or
// misses it. Throws GeometryViolation if a site lands farther than `margin`
// from `base`.
SiteSet align_enlarge(const SiteSet& base, const std::vector<Block>& blocks,
                      std::optional<double> margin = std::nullopt);

} // namespace qp
