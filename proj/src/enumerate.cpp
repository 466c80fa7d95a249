#include "nestevo/enumerate.hpp"

#include <limits>

namespace nestevo {

std::uint64_t joint_cardinality(const SearchSpaceSpec& space, const DeviceSpec& device) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  auto mul = [](std::uint64_t a, std::uint64_t b) { return (b != 0 && a > kMax / b) ? kMax : a * b; };
  const int positions = space.n_block * space.depth_domain.back() - space.exit_min_position;
  const std::uint64_t exits = positions >= 64 ? kMax : (std::uint64_t{1} << positions) - 1;
  const std::uint64_t dvfs = device.compute_freq_ghz.size() * std::max<std::size_t>(1, device.emc_freq_ghz.size());
  return mul(mul(backbone_cardinality(space), exits), dvfs);
}

std::vector<InnerCandidate> exhaustive_inner_front(const BackboneGenome& b, const StaticScore& baseline,
                                                   const Evaluator& ev, const IoeConfig& config) {
  const LayerTable layers(b, ev.space());
  const ExitProfile profile = ev.profile(b);
  std::vector<InnerCandidate> all;
  for (const auto& x : enumerate_exit_genomes(b, ev.space())) {
    for (const auto& f : enumerate_dvfs(ev.device())) {
      InnerCandidate c{x, f, dynamic_fitness(layers, x, f, profile, baseline, ev, config.gamma), {}};
      c.objectives = ioe_objectives(c.score, config.objective_mode);
      all.push_back(std::move(c));
    }
  }
  std::vector<InnerCandidate> front;
  update_archive(front, all);
  return front;
}

EnumerationResult enumerate_front(const Evaluator& ev, const IoeConfig& config) {
  EnumerationResult out;
  const std::uint64_t before = ev.dynamic_evaluations();
  std::vector<BackboneRecord> records;
  for (const auto& b : enumerate_backbones(ev.space())) {
    BackboneRecord rec;
    rec.backbone = b;
    rec.static_score = eval_static(b, ev.space(), ev.device(), ev.backend(), ev.surrogate(), ev.seed());
    rec.ioe_front = exhaustive_inner_front(b, rec.static_score, ev, config);
    rec.ioe_hypervolume = ioe_front_hypervolume(rec.ioe_front);
    records.push_back(std::move(rec));
  }
  out.backbones = records.size();
  out.front = final_solutions(records);
  out.evaluations = ev.dynamic_evaluations() - before;
  return out;
}

}  // namespace nestevo
