#include "nestevo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nestevo/error.hpp"
#include "nestevo/rng.hpp"

namespace nestevo {

namespace {

void require_homogeneous(std::span<const ObjectiveVector> points) {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!same_shape(points[0], points[i])) throw StructuralError("points differ in objective shape");
}

// Points shifted so the reference sits at the origin and larger is better.
std::vector<std::vector<double>> shifted(const Front& front) {
  std::vector<std::vector<double>> out;
  out.reserve(front.points().size());
  for (const auto& p : front.points()) {
    std::vector<double> q(front.dimension());
    for (std::size_t d = 0; d < q.size(); ++d) q[d] = p.normalized(d) - front.reference().normalized(d);
    out.push_back(std::move(q));
  }
  return out;
}

double sweep_2d(std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a[0] != b[0] ? a[0] > b[0] : a[1] > b[1];
  });
  double area = 0.0;
  double covered = 0.0;
  for (const auto& p : pts) {
    if (p[1] > covered) {
      area += p[0] * (p[1] - covered);
      covered = p[1];
    }
  }
  return area;
}

double slice_3d(const std::vector<std::vector<double>>& pts) {
  std::vector<double> levels;
  levels.reserve(pts.size());
  for (const auto& p : pts) levels.push_back(p[2]);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  double volume = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double top = levels[k];
    const double bottom = k + 1 < levels.size() ? levels[k + 1] : 0.0;
    if (top <= 0.0) break;
    std::vector<std::array<double, 2>> slab;
    for (const auto& p : pts)
      if (p[2] >= top) slab.push_back({p[0], p[1]});
    volume += sweep_2d(std::move(slab)) * (top - std::max(bottom, 0.0));
  }
  return volume;
}

}  // namespace

Front::Front(std::vector<ObjectiveVector> points, ObjectiveVector reference) : reference_(std::move(reference)) {
  for (const auto& p : points) {
    if (!same_shape(p, reference_)) throw StructuralError("front point and reference differ in shape");
    if (!weakly_dominates(p, reference_))
      throw std::invalid_argument("front point does not dominate the reference point");
  }
  points_ = nondominated_subset(points);
}

std::vector<ObjectiveVector> nondominated_subset(std::span<const ObjectiveVector> points) {
  require_homogeneous(points);
  std::vector<ObjectiveVector> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (j == i) continue;
      if (dominates(points[j], points[i])) keep = false;
      // Collapse duplicates onto their first occurrence.
      if (j < i && points[j] == points[i]) keep = false;
    }
    if (keep) out.push_back(points[i]);
  }
  return out;
}

std::vector<ObjectiveVector> merge_nondominated(std::span<const ObjectiveVector> a,
                                                std::span<const ObjectiveVector> b) {
  if (!a.empty() && !b.empty() && !same_shape(a[0], b[0]))
    throw StructuralError("merged fronts differ in objective shape");
  std::vector<ObjectiveVector> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return nondominated_subset(all);
}

double hypervolume(const Front& front) {
  if (front.empty()) return 0.0;
  const auto pts = shifted(front);
  switch (front.dimension()) {
    case 1: {
      double best = 0.0;
      for (const auto& p : pts) best = std::max(best, p[0]);
      return best;
    }
    case 2: {
      std::vector<std::array<double, 2>> flat;
      flat.reserve(pts.size());
      for (const auto& p : pts) flat.push_back({p[0], p[1]});
      return sweep_2d(std::move(flat));
    }
    case 3:
      return slice_3d(pts);
    default:
      throw std::invalid_argument("exact hypervolume supports at most 3 objectives");
  }
}

HypervolumeEstimate hypervolume_monte_carlo(const Front& front, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("Monte Carlo hypervolume needs at least one sample");
  if (front.empty()) return {};
  const auto pts = shifted(front);
  const std::size_t m = front.dimension();
  std::vector<double> upper(m, 0.0);
  for (const auto& p : pts)
    for (std::size_t d = 0; d < m; ++d) upper[d] = std::max(upper[d], p[d]);
  double box = 1.0;
  for (double u : upper) box *= u;
  if (box <= 0.0) return {};

  Rng rng(seed);
  std::vector<double> s(m);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t d = 0; d < m; ++d) s[d] = rng.uniform01() * upper[d];
    const bool dominated = std::any_of(pts.begin(), pts.end(), [&](const std::vector<double>& p) {
      for (std::size_t d = 0; d < m; ++d)
        if (p[d] < s[d]) return false;
      return true;
    });
    if (dominated) ++hits;
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * frac, box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

double ratio_of_dominance(std::span<const ObjectiveVector> a, std::span<const ObjectiveVector> b) {
  if (!a.empty() && !b.empty() && !same_shape(a[0], b[0]))
    throw StructuralError("compared fronts differ in objective shape");
  require_homogeneous(a);
  require_homogeneous(b);
  if (a.empty()) return 0.0;
  std::size_t winners = 0;
  for (const auto& p : a)
    if (std::any_of(b.begin(), b.end(), [&](const ObjectiveVector& q) { return dominates(p, q); })) ++winners;
  return static_cast<double>(winners) / static_cast<double>(a.size());
}

double ratio_of_dominance(const Front& a, const Front& b) {
  if (!same_shape(a.reference(), b.reference()))
    throw StructuralError("compared fronts differ in objective shape");
  return ratio_of_dominance(std::span<const ObjectiveVector>(a.points()),
                            std::span<const ObjectiveVector>(b.points()));
}

}  // namespace nestevo
