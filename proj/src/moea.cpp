#include "nestevo/moea.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nestevo/error.hpp"

namespace nestevo {

ObjectiveVector::ObjectiveVector(std::vector<double> values, std::vector<Direction> directions)
    : values_(std::move(values)), directions_(std::move(directions)) {
  if (values_.size() != directions_.size())
    throw StructuralError("objective values and directions differ in length");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("objective value is not finite");
}

bool same_shape(const ObjectiveVector& a, const ObjectiveVector& b) {
  return a.directions() == b.directions();
}

namespace {

void require_same_shape(const ObjectiveVector& a, const ObjectiveVector& b) {
  if (!same_shape(a, b)) throw StructuralError("objective vectors differ in length or direction");
}

}  // namespace

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  require_same_shape(a, b);
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.normalized(i);
    const double y = b.normalized(i);
    if (x < y) return false;
    if (x > y) strictly = true;
  }
  return strictly;
}

bool weakly_dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  require_same_shape(a, b);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.normalized(i) < b.normalized(i)) return false;
  return true;
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectiveVector> pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> fronts;
  if (n == 0) return fronts;
  for (std::size_t i = 1; i < n; ++i) require_same_shape(pop[0], pop[i]);

  std::vector<std::vector<std::size_t>> dominated_by(n);
  std::vector<std::size_t> domination_count(n, 0);
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(pop[p], pop[q])) {
        dominated_by[p].push_back(q);
        ++domination_count[q];
      } else if (dominates(pop[q], pop[p])) {
        dominated_by[q].push_back(p);
        ++domination_count[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p)
    if (domination_count[p] == 0) current.push_back(p);

  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current)
      for (std::size_t q : dominated_by[p])
        if (--domination_count[q] == 0) next.push_back(q);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  if (n <= 2) return std::vector<double>(n, kInfiniteCrowding);
  const std::size_t m = front[0].size();
  std::vector<double> distance(n, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t obj = 0; obj < m; ++obj) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return front[a].normalized(obj) < front[b].normalized(obj);
    });
    const double lo = front[order.front()].normalized(obj);
    const double hi = front[order.back()].normalized(obj);
    const double range = hi - lo;
    if (range <= 0.0) continue;
    distance[order.front()] = kInfiniteCrowding;
    distance[order.back()] = kInfiniteCrowding;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const std::size_t i = order[k];
      if (std::isinf(distance[i])) continue;
      distance[i] += (front[order[k + 1]].normalized(obj) - front[order[k - 1]].normalized(obj)) / range;
    }
  }
  return distance;
}

bool RankedPopulation::precedes(std::size_t i, std::size_t j) const {
  if (rank[i] != rank[j]) return rank[i] < rank[j];
  if (crowding[i] != crowding[j]) return crowding[i] > crowding[j];
  return members[i].id < members[j].id;
}

RankedPopulation rank_population(std::vector<RankedPopulation::Member> members) {
  RankedPopulation out;
  out.members = std::move(members);
  const std::size_t n = out.members.size();
  out.rank.assign(n, 0);
  out.crowding.assign(n, 0.0);

  std::vector<ObjectiveVector> objectives;
  objectives.reserve(n);
  for (const auto& m : out.members) objectives.push_back(m.objectives);

  const auto fronts = fast_nondominated_sort(objectives);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    std::vector<ObjectiveVector> front_objectives;
    front_objectives.reserve(fronts[r].size());
    for (std::size_t i : fronts[r]) front_objectives.push_back(objectives[i]);
    const auto crowd = crowding_distance(front_objectives);
    for (std::size_t k = 0; k < fronts[r].size(); ++k) {
      out.rank[fronts[r][k]] = r;
      out.crowding[fronts[r][k]] = crowd[k];
    }
  }
  return out;
}

std::vector<std::size_t> survivor_select(const RankedPopulation& ranked, std::size_t k) {
  if (k > ranked.size()) throw std::invalid_argument("survivor count exceeds population size");
  std::vector<std::size_t> order(ranked.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranked.precedes(a, b); });
  std::vector<std::size_t> ids;
  ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) ids.push_back(ranked.members[order[i]].id);
  return ids;
}

std::size_t tournament_select(const RankedPopulation& ranked, const VariationParams& params, Rng& rng) {
  if (ranked.size() == 0) throw std::invalid_argument("tournament over an empty population");
  std::size_t best = rng.uniform_index(ranked.size());
  for (std::size_t t = 1; t < params.tournament_size; ++t) {
    const std::size_t challenger = rng.uniform_index(ranked.size());
    if (ranked.precedes(challenger, best)) best = challenger;
  }
  return ranked.members[best].id;
}

}  // namespace nestevo
