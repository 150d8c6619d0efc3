#include "qplab/lattice.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "qplab/errors.hpp"

namespace qp {

Site Site::integer(const std::vector<int>& x) {
  std::vector<int> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = 2 * x[i];
  return Site(std::move(t));
}

bool Site::is_integer() const {
  return std::all_of(twice.begin(), twice.end(), [](int v) { return v % 2 == 0; });
}

Eigen::VectorXd Site::coords() const {
  Eigen::VectorXd c(dim());
  for (int i = 0; i < dim(); ++i) c[i] = coord(i);
  return c;
}

static void check_dims(const Site& a, const Site& b) {
  if (a.dim() != b.dim())
    throw DomainError("site dimension mismatch " + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()));
}

Site operator+(const Site& a, const Site& b) {
  check_dims(a, b);
  Site r = a;
  for (int i = 0; i < a.dim(); ++i) r.twice[i] += b.twice[i];
  return r;
}

Site operator-(const Site& a, const Site& b) {
  check_dims(a, b);
  Site r = a;
  for (int i = 0; i < a.dim(); ++i) r.twice[i] -= b.twice[i];
  return r;
}

Site operator-(const Site& a) {
  Site r = a;
  for (auto& v : r.twice) v = -v;
  return r;
}

int sup_twice(const Site& a) {
  int m = 0;
  for (int v : a.twice) m = std::max(m, std::abs(v));
  return m;
}

double dot(const Site& n, const Eigen::VectorXd& omega) {
  if (omega.size() != n.dim()) throw DomainError("frequency dimension does not match site");
  // keep the doubled integer product exact as long as possible
  double s = 0.0;
  for (int i = 0; i < n.dim(); ++i) s += n.twice[i] * omega[i];
  return 0.5 * s;
}

// ---------------------------------------------------------------------------

SiteSet::SiteSet(std::vector<Site> members, std::optional<Site> c)
    : center(std::move(c)), m_(std::move(members)) {
  std::sort(m_.begin(), m_.end());
  m_.erase(std::unique(m_.begin(), m_.end()), m_.end());
  if (!m_.empty()) {
    const int d = m_.front().dim();
    for (const auto& s : m_)
      if (s.dim() != d) throw DomainError("mixed dimensions in site set");
  }
}

bool SiteSet::contains(const Site& s) const { return std::binary_search(m_.begin(), m_.end(), s); }

long SiteSet::index_of(const Site& s) const {
  auto it = std::lower_bound(m_.begin(), m_.end(), s);
  if (it == m_.end() || *it != s) return -1;
  return static_cast<long>(it - m_.begin());
}

bool SiteSet::subset_of(const SiteSet& o) const {
  return std::includes(o.m_.begin(), o.m_.end(), m_.begin(), m_.end());
}

bool SiteSet::intersects(const SiteSet& o) const {
  const SiteSet& small = size() <= o.size() ? *this : o;
  const SiteSet& large = size() <= o.size() ? o : *this;
  for (const auto& s : small)
    if (large.contains(s)) return true;
  return false;
}

SiteSet SiteSet::translated(const Site& shift) const {
  std::vector<Site> v;
  v.reserve(size());
  for (const auto& s : m_) v.push_back(s + shift);
  std::optional<Site> c;
  if (center) c = *center + shift;
  return SiteSet(std::move(v), c);
}

SiteSet SiteSet::negated() const {
  std::vector<Site> v;
  v.reserve(size());
  for (const auto& s : m_) v.push_back(-s);
  std::optional<Site> c;
  if (center) c = -*center;
  return SiteSet(std::move(v), c);
}

bool SiteSet::symmetric_about(const Site& c) const {
  const Site two_c = c + c;
  for (const auto& s : m_)
    if (!contains(two_c - s)) return false;
  return true;
}

SiteSet set_union(const SiteSet& a, const SiteSet& b) {
  std::vector<Site> v;
  v.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(v));
  return SiteSet(std::move(v), a.center);
}

SiteSet set_difference(const SiteSet& a, const SiteSet& b) {
  std::vector<Site> v;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(v));
  return SiteSet(std::move(v), a.center);
}

SiteSet set_intersection(const SiteSet& a, const SiteSet& b) {
  std::vector<Site> v;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(v));
  return SiteSet(std::move(v), a.center);
}

// Enumerates every offset o in {-r..r}^d (odometer order).
template <typename F>
static void for_each_offset(int d, int r, F&& f) {
  std::vector<int> o(d, -r);
  if (d == 0) return;
  while (true) {
    f(o);
    int i = d - 1;
    while (i >= 0 && o[i] == r) o[i--] = -r;
    if (i < 0) return;
    ++o[i];
  }
}

SiteSet box(const Site& center, int radius) {
  if (radius < 0) throw DomainError("negative box radius");
  const int d = center.dim();
  // integer x with |2x - c2| <= 2r, per coordinate
  std::vector<int> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    const int c2 = center.twice[i];
    lo[i] = static_cast<int>(std::ceil((c2 - 2.0 * radius) / 2.0));
    hi[i] = static_cast<int>(std::floor((c2 + 2.0 * radius) / 2.0));
  }
  std::vector<Site> v;
  std::vector<int> x = lo;
  if (d == 0) return SiteSet({}, center);
  while (true) {
    v.push_back(Site::integer(x));
    int i = d - 1;
    while (i >= 0 && x[i] == hi[i]) {
      x[i] = lo[i];
      --i;
    }
    if (i < 0) break;
    ++x[i];
  }
  return SiteSet(std::move(v), center);
}

SiteSet coset_box(const Site& center, int radius) {
  if (radius < 0) throw DomainError("negative box radius");
  std::vector<Site> v;
  for_each_offset(center.dim(), radius, [&](const std::vector<int>& o) {
    v.push_back(center + Site::integer(o));
  });
  return SiteSet(std::move(v), center);
}

static int pair_dist_twice(const Site& a, const Site& b) { return sup_twice(a - b); }

double dist(const Site& a, const SiteSet& b) {
  if (b.empty()) throw DomainError("distance to an empty set");
  int best = std::numeric_limits<int>::max();
  for (const auto& y : b) best = std::min(best, pair_dist_twice(a, y));
  return 0.5 * best;
}

double dist(const SiteSet& a, const SiteSet& b) {
  if (a.empty() || b.empty()) throw DomainError("distance with an empty set");
  int best = std::numeric_limits<int>::max();
  for (const auto& x : a)
    for (const auto& y : b) {
      best = std::min(best, pair_dist_twice(x, y));
      if (best == 0) return 0.0;
    }
  return 0.5 * best;
}

double diam(const SiteSet& a) {
  if (a.empty()) throw DomainError("diameter of an empty set");
  // sup-metric diameter is the largest coordinate extent
  const int d = a.dim();
  int best = 0;
  for (int i = 0; i < d; ++i) {
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (const auto& s : a) {
      lo = std::min(lo, s.twice[i]);
      hi = std::max(hi, s.twice[i]);
    }
    best = std::max(best, hi - lo);
  }
  return 0.5 * best;
}

Metrics metrics(const SiteSet& a, const SiteSet& b) { return {dist(a, b), diam(a)}; }

SiteSet align_enlarge(const SiteSet& base, const std::vector<Block>& blocks,
                      std::optional<double> margin) {
  SiteSet cur = base;
  std::vector<bool> absorbed(blocks.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (absorbed[i]) continue;
      const SiteSet& b = blocks[i].set;
      if (b.empty() || !cur.intersects(b)) continue;
      absorbed[i] = true;
      if (b.subset_of(cur)) continue;
      cur = set_union(cur, b);
      changed = true;
    }
  }
  if (margin && !base.empty()) {
    for (const auto& s : cur) {
      const double r = dist(s, base);
      if (r > *margin)
        throw GeometryViolation("enlargement reaches distance " + std::to_string(r) +
                                " beyond margin " + std::to_string(*margin));
    }
  }
  cur.center = base.center;
  return cur;
}

} // namespace qp
