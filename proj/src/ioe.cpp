#include "nestevo/ioe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nestevo/error.hpp"

namespace nestevo {

void IoeConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("ioe gamma must be >= 0");
  if (generations < 1 || population < 1) throw std::invalid_argument("ioe generations and population must be >= 1");
  if (budget < population) throw std::invalid_argument("ioe budget must cover one population");
  if (static_cast<long long>(generations) * population > budget)
    throw std::invalid_argument("ioe generations * population exceeds the budget");
  variation.validate();
}

double dissim(const ExitProfile& profile, std::span<const int> sampled_positions, std::size_t i) {
  if (i >= sampled_positions.size()) throw std::out_of_range("dissim index out of range");
  double best = 0.0;
  for (std::size_t j = 0; j < i; ++j) best = std::max(best, profile.n_at(sampled_positions[j]));
  return 1.0 - best;
}

double exit_score(double n, double energy_ratio, double latency_ratio, double dissim_value, double gamma) {
  return n * energy_ratio * latency_ratio * std::pow(dissim_value, gamma);
}

DynamicScore dynamic_fitness(const LayerTable& layers, const ExitGenome& x, const DvfsGenome& f,
                             const ExitProfile& profile, const StaticScore& baseline, const Evaluator& ev,
                             double gamma) {
  const auto positions = x.sampled_positions();
  if (positions.empty()) throw StructuralError("exit genome has no sampled exit");
  if (x.bits.size() != profile.positions.size())
    throw StructuralError("exit genome is not conditioned on this backbone");
  ev.record_dynamic_evaluation();

  DynamicScore s;
  s.n_exits = positions.size();
  double dissim_sum = 0.0;
  double best_before = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const int pos = positions[i];
    const double n = profile.n_at(pos);
    const double d = 1.0 - best_before;
    const auto cost = ev.cost(layers.prefix(pos, positions, ev.exit_overhead_fraction()), f);
    const double e_ratio = cost.energy_mj / baseline.energy_mj;
    const double l_ratio = cost.latency_ms / baseline.latency_ms;
    s.scalar_d += exit_score(n, e_ratio, l_ratio, d, gamma);
    s.mean_n += n;
    s.mean_energy_ratio += e_ratio;
    s.mean_latency_ratio += l_ratio;
    dissim_sum += d;
    best_before = std::max(best_before, n);
  }
  const double k = static_cast<double>(positions.size());
  s.scalar_d /= k;
  s.mean_n /= k;
  s.mean_energy_ratio /= k;
  s.mean_latency_ratio /= k;
  s.mean_dissim = dissim_sum / k;
  s.effective_correctness = s.mean_n * std::pow(s.mean_dissim, gamma);
  return s;
}

DynamicScore dynamic_fitness(const BackboneGenome& b, const ExitGenome& x, const DvfsGenome& f,
                             const ExitProfile& profile, const StaticScore& baseline, const Evaluator& ev,
                             double gamma) {
  if (!x.is_valid_for(b, ev.space())) throw StructuralError("exit genome is not conditioned on this backbone");
  return dynamic_fitness(LayerTable(b, ev.space()), x, f, profile, baseline, ev, gamma);
}

ObjectiveVector ioe_objectives(const DynamicScore& score, ObjectiveMode mode) {
  if (mode == ObjectiveMode::Scalar) return ObjectiveVector({score.scalar_d}, {Direction::Maximize});
  return ObjectiveVector({score.effective_correctness, score.mean_energy_ratio, score.mean_latency_ratio},
                         {Direction::Maximize, Direction::Minimize, Direction::Minimize});
}

double exit_n_spread(const ExitProfile& profile, const ExitGenome& x) {
  const auto positions = x.sampled_positions();
  if (positions.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j, ++pairs)
      sum += std::abs(profile.n_at(positions[i]) - profile.n_at(positions[j]));
  return sum / static_cast<double>(pairs);
}

namespace {

bool genome_less(const InnerCandidate& a, const InnerCandidate& b) {
  if (a.exits != b.exits) return a.exits < b.exits;
  return a.dvfs < b.dvfs;
}

bool same_genome(const InnerCandidate& a, const InnerCandidate& b) { return a.exits == b.exits && a.dvfs == b.dvfs; }

struct Context {
  const BackboneGenome& backbone;
  const LayerTable layers;
  const ExitProfile profile;
  const StaticScore& baseline;
  const Evaluator& ev;
  const IoeConfig& config;
};

InnerCandidate evaluate(const Context& ctx, ExitGenome x, DvfsGenome f) {
  InnerCandidate c;
  c.score = dynamic_fitness(ctx.layers, x, f, ctx.profile, ctx.baseline, ctx.ev, ctx.config.gamma);
  c.objectives = ioe_objectives(c.score, ctx.config.objective_mode);
  c.exits = std::move(x);
  c.dvfs = std::move(f);
  return c;
}

RankedPopulation rank(std::span<const InnerCandidate> pop) {
  std::vector<RankedPopulation::Member> members;
  members.reserve(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) members.push_back({i, pop[i].objectives});
  return rank_population(std::move(members));
}

std::vector<std::pair<ExitGenome, DvfsGenome>> initial_population(const Context& ctx, Rng& rng) {
  const auto& space = ctx.ev.space();
  const auto& device = ctx.ev.device();
  const std::size_t target = static_cast<std::size_t>(ctx.config.population);
  std::vector<std::pair<ExitGenome, DvfsGenome>> pop;

  const int n_positions = ctx.layers.total_layers() - space.exit_min_position;
  const auto dvfs_points = enumerate_dvfs(device);
  if (n_positions <= 20) {
    const std::uint64_t joint = ((std::uint64_t{1} << n_positions) - 1) * dvfs_points.size();
    if (joint <= target) {
      for (const auto& x : enumerate_exit_genomes(ctx.backbone, space))
        for (const auto& f : dvfs_points) pop.emplace_back(x, f);
    }
  }
  while (pop.size() < target)
    pop.emplace_back(sample_exit_genome(ctx.backbone, space, rng), sample_dvfs(device, rng));
  return pop;
}

std::vector<std::pair<ExitGenome, DvfsGenome>> offspring(const Context& ctx, std::span<const InnerCandidate> parents,
                                                         Rng& rng) {
  const auto ranked = rank(parents);
  const auto& params = ctx.config.variation;
  const std::size_t target = static_cast<std::size_t>(ctx.config.population);
  std::vector<std::pair<ExitGenome, DvfsGenome>> out;
  out.reserve(target);
  while (out.size() < target) {
    const auto& a = parents[tournament_select(ranked, params, rng)];
    const auto& b = parents[tournament_select(ranked, params, rng)];
    auto [xa, xb] = crossover(a.exits, b.exits, params, rng);
    auto [fa, fb] = crossover(a.dvfs, b.dvfs, params, rng);
    out.emplace_back(mutate_exit(xa, params, rng), mutate_dvfs(fa, ctx.ev.space(), params, rng));
    if (out.size() < target)
      out.emplace_back(mutate_exit(xb, params, rng), mutate_dvfs(fb, ctx.ev.space(), params, rng));
  }
  return out;
}

}  // namespace

void update_archive(std::vector<InnerCandidate>& archive, std::span<const InnerCandidate> incoming) {
  std::vector<InnerCandidate> pool = archive;
  pool.insert(pool.end(), incoming.begin(), incoming.end());
  std::stable_sort(pool.begin(), pool.end(), genome_less);
  pool.erase(std::unique(pool.begin(), pool.end(), same_genome), pool.end());

  std::vector<InnerCandidate> kept;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pool.size() && !dominated; ++j)
      dominated = j != i && dominates(pool[j].objectives, pool[i].objectives);
    if (!dominated) kept.push_back(pool[i]);
  }
  archive = std::move(kept);
}

IoeResult run_ioe(const BackboneGenome& b, const StaticScore& baseline, const Evaluator& ev, const IoeConfig& config,
                  Rng& rng, const IoeObserver& observer) {
  config.validate();
  b.check(ev.space());
  const Context ctx{b, LayerTable(b, ev.space()), ev.profile(b), baseline, ev, config};
  const std::size_t pop_size = static_cast<std::size_t>(config.population);

  IoeResult result;
  std::vector<InnerCandidate> parents;
  for (int g = 0; g < config.generations; ++g) {
    auto genomes = g == 0 ? initial_population(ctx, rng) : offspring(ctx, parents, rng);
    std::vector<InnerCandidate> evaluated;
    evaluated.reserve(genomes.size());
    for (auto& [x, f] : genomes) evaluated.push_back(evaluate(ctx, std::move(x), std::move(f)));
    result.evaluations += evaluated.size();
    update_archive(result.archive, evaluated);

    // Elitist (mu + lambda) survivor step.
    std::vector<InnerCandidate> pool = std::move(parents);
    pool.insert(pool.end(), std::make_move_iterator(evaluated.begin()), std::make_move_iterator(evaluated.end()));
    const auto survivors = survivor_select(rank(pool), std::min(pop_size, pool.size()));
    parents.clear();
    for (std::size_t id : survivors) parents.push_back(pool[id]);

    if (observer) observer(g, result.archive);
  }
  return result;
}

}  // namespace nestevo
