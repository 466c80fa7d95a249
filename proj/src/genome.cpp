#include "nestevo/genome.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nestevo/error.hpp"

namespace nestevo {

namespace {

template <typename T>
bool strictly_increasing(const std::vector<T>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](T a, T b) { return !(a < b); }) == v.end();
}

template <typename T>
void require_domain(const std::vector<T>& v, const char* name) {
  if (v.empty()) throw std::invalid_argument(std::string(name) + " domain is empty");
  if (!strictly_increasing(v))
    throw std::invalid_argument(std::string(name) + " domain must be strictly increasing");
}

bool in_range(int idx, std::size_t n) { return idx >= 0 && static_cast<std::size_t>(idx) < n; }

int uniform_int(std::size_t n, Rng& rng) { return static_cast<int>(rng.uniform_index(n)); }

}  // namespace

std::vector<int> integer_levels(int lo, int hi, int count) {
  if (count < 1) throw std::invalid_argument("level count must be positive");
  if (count == 1) return {lo};
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  const double step = static_cast<double>(hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) out.push_back(static_cast<int>(std::lround(lo + step * i)));
  return out;
}

std::vector<double> frequency_levels(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("level count must be positive");
  if (count == 1) return {lo};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) {
    // Round to MHz so table values print cleanly.
    out.push_back(std::round((lo + step * i) * 1000.0) / 1000.0);
  }
  return out;
}

std::vector<DeviceSpec> default_devices() {
  auto make = [](std::string name, std::vector<double> compute, std::vector<double> emc) {
    DeviceSpec d;
    d.name = std::move(name);
    d.default_compute_idx = compute.size() - 1;
    d.default_emc_idx = emc.empty() ? 0 : emc.size() - 1;
    d.compute_freq_ghz = std::move(compute);
    d.emc_freq_ghz = std::move(emc);
    return d;
  };
  const auto agx_emc = frequency_levels(0.2, 2.1, 9);
  const auto tx2_emc = frequency_levels(0.2, 1.8, 11);
  return {
      make("agx_gpu", frequency_levels(0.1, 1.4, 14), agx_emc),
      make("agx_cpu", frequency_levels(0.1, 2.3, 29), agx_emc),
      make("tx2_gpu", frequency_levels(0.1, 1.4, 13), tx2_emc),
      make("tx2_cpu", frequency_levels(0.3, 2.1, 12), tx2_emc),
  };
}

void DeviceSpec::validate() const {
  if (name.empty()) throw std::invalid_argument("device name is empty");
  require_domain(compute_freq_ghz, "compute frequency");
  if (compute_freq_ghz.front() <= 0.0)
    throw std::invalid_argument("device " + name + ": frequencies must be positive");
  if (default_compute_idx >= compute_freq_ghz.size())
    throw std::invalid_argument("device " + name + ": default compute index out of range");
  if (has_emc()) {
    require_domain(emc_freq_ghz, "emc frequency");
    if (emc_freq_ghz.front() <= 0.0)
      throw std::invalid_argument("device " + name + ": frequencies must be positive");
    if (default_emc_idx >= emc_freq_ghz.size())
      throw std::invalid_argument("device " + name + ": default emc index out of range");
  }
}

void SearchSpaceSpec::validate() const {
  if (n_block < 1) throw std::invalid_argument("n_block must be >= 1");
  if (exit_min_position < 1) throw std::invalid_argument("exit_min_position must be >= 1");
  require_domain(resolution_domain, "resolution");
  require_domain(depth_domain, "depth");
  require_domain(width_domain, "width");
  require_domain(kernel_domain, "kernel");
  require_domain(expand_domain, "expand");
  if (depth_domain.front() < 1) throw std::invalid_argument("depths must be >= 1");
  if (n_block * depth_domain.back() < exit_min_position + 1)
    throw std::invalid_argument("deepest backbone cannot host an exit");
  for (const auto& d : devices) d.validate();
  for (std::size_t i = 0; i < devices.size(); ++i)
    for (std::size_t j = i + 1; j < devices.size(); ++j)
      if (devices[i].name == devices[j].name)
        throw std::invalid_argument("duplicate device name " + devices[i].name);
}

const DeviceSpec& SearchSpaceSpec::device(std::string_view name) const {
  for (const auto& d : devices)
    if (d.name == name) return d;
  throw std::invalid_argument("unknown device " + std::string(name));
}

int BackboneGenome::total_layers(const SearchSpaceSpec& space) const {
  int total = 0;
  for (const auto& blk : blocks) total += space.depth_domain.at(static_cast<std::size_t>(blk.depth_idx));
  return total;
}

bool BackboneGenome::is_valid(const SearchSpaceSpec& space) const {
  if (blocks.size() != static_cast<std::size_t>(space.n_block)) return false;
  if (!in_range(resolution_idx, space.resolution_domain.size())) return false;
  for (const auto& blk : blocks) {
    if (!in_range(blk.depth_idx, space.depth_domain.size()) ||
        !in_range(blk.width_idx, space.width_domain.size()) ||
        !in_range(blk.kernel_idx, space.kernel_domain.size()) ||
        !in_range(blk.expand_idx, space.expand_domain.size()))
      return false;
  }
  return total_layers(space) >= space.exit_min_position + 1;
}

void BackboneGenome::check(const SearchSpaceSpec& space) const {
  if (!is_valid(space)) throw StructuralError("backbone genome is not valid in this search space");
}

std::uint64_t BackboneGenome::hash() const {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(resolution_idx));
  for (const auto& blk : blocks) {
    h = hash_combine(h, static_cast<std::uint64_t>(blk.depth_idx));
    h = hash_combine(h, static_cast<std::uint64_t>(blk.width_idx));
    h = hash_combine(h, static_cast<std::uint64_t>(blk.kernel_idx));
    h = hash_combine(h, static_cast<std::uint64_t>(blk.expand_idx));
  }
  return h;
}

std::size_t ExitGenome::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::vector<int> ExitGenome::sampled_positions() const {
  std::vector<int> out;
  for (std::size_t p = 0; p < bits.size(); ++p)
    if (bits[p]) out.push_back(first_position + static_cast<int>(p));
  return out;
}

bool ExitGenome::is_valid_for(const BackboneGenome& b, const SearchSpaceSpec& space) const {
  const int expected = b.total_layers(space) - space.exit_min_position;
  return first_position == space.exit_min_position && expected >= 1 &&
         bits.size() == static_cast<std::size_t>(expected) && count() >= 1 &&
         std::all_of(bits.begin(), bits.end(), [](std::uint8_t v) { return v <= 1; });
}

std::string ExitGenome::bit_string() const {
  std::string s;
  s.reserve(bits.size());
  for (auto v : bits) s.push_back(v ? '1' : '0');
  return s;
}

bool DvfsGenome::is_valid_for(const DeviceSpec& d) const {
  if (device != d.name || !in_range(compute_idx, d.compute_freq_ghz.size())) return false;
  if (d.has_emc()) return emc_idx.has_value() && in_range(*emc_idx, d.emc_freq_ghz.size());
  return !emc_idx.has_value();
}

double DvfsGenome::compute_ghz(const DeviceSpec& d) const {
  return d.compute_freq_ghz.at(static_cast<std::size_t>(compute_idx));
}

double DvfsGenome::memory_ghz(const DeviceSpec& d) const {
  if (!d.has_emc()) return compute_ghz(d);
  return d.emc_freq_ghz.at(static_cast<std::size_t>(emc_idx.value()));
}

void VariationParams::validate() const {
  if (!(mutation_prob_per_gene >= 0.0 && mutation_prob_per_gene <= 1.0))
    throw std::invalid_argument("mutation_prob_per_gene must be in [0,1]");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0))
    throw std::invalid_argument("crossover_prob must be in [0,1]");
  if (tournament_size < 1) throw std::invalid_argument("tournament_size must be >= 1");
}

std::vector<int> admissible_positions(const BackboneGenome& b, const SearchSpaceSpec& space) {
  std::vector<int> out;
  for (int p = space.exit_min_position; p < b.total_layers(space); ++p) out.push_back(p);
  return out;
}

void repair_backbone(BackboneGenome& b, const SearchSpaceSpec& space, Rng& rng) {
  const int max_depth_idx = static_cast<int>(space.depth_domain.size()) - 1;
  while (b.total_layers(space) < space.exit_min_position + 1) {
    // Shallowest block that can still grow; lowest index on ties.
    auto it = std::min_element(b.blocks.begin(), b.blocks.end(),
                               [](const BlockGene& l, const BlockGene& r) { return l.depth_idx < r.depth_idx; });
    if (it == b.blocks.end() || it->depth_idx >= max_depth_idx)
      throw std::logic_error("backbone repair cannot reach the minimum depth");
    const int span = max_depth_idx - it->depth_idx;
    it->depth_idx += 1 + uniform_int(static_cast<std::size_t>(span), rng);
  }
}

void repair_exit_genome(ExitGenome& x, Rng& rng) {
  if (x.bits.empty()) throw StructuralError("exit genome has no admissible positions");
  if (x.count() == 0) x.bits[rng.uniform_index(x.bits.size())] = 1;
}

BackboneGenome sample_backbone(const SearchSpaceSpec& space, Rng& rng) {
  BackboneGenome b;
  b.resolution_idx = uniform_int(space.resolution_domain.size(), rng);
  b.blocks.resize(static_cast<std::size_t>(space.n_block));
  for (auto& blk : b.blocks) {
    blk.depth_idx = uniform_int(space.depth_domain.size(), rng);
    blk.width_idx = uniform_int(space.width_domain.size(), rng);
    blk.kernel_idx = uniform_int(space.kernel_domain.size(), rng);
    blk.expand_idx = uniform_int(space.expand_domain.size(), rng);
  }
  repair_backbone(b, space, rng);
  return b;
}

ExitGenome sample_exit_genome(const BackboneGenome& b, const SearchSpaceSpec& space, Rng& rng) {
  ExitGenome x;
  x.first_position = space.exit_min_position;
  const int n = b.total_layers(space) - space.exit_min_position;
  if (n < 1) throw StructuralError("backbone admits no exit position");
  x.bits.resize(static_cast<std::size_t>(n));
  for (auto& bit : x.bits) bit = rng.bernoulli(0.5) ? 1 : 0;
  repair_exit_genome(x, rng);
  return x;
}

DvfsGenome sample_dvfs(const DeviceSpec& device, Rng& rng) {
  DvfsGenome f;
  f.device = device.name;
  f.compute_idx = uniform_int(device.compute_freq_ghz.size(), rng);
  if (device.has_emc()) f.emc_idx = uniform_int(device.emc_freq_ghz.size(), rng);
  return f;
}

DvfsGenome default_dvfs(const DeviceSpec& device) {
  DvfsGenome f;
  f.device = device.name;
  f.compute_idx = static_cast<int>(device.default_compute_idx);
  if (device.has_emc()) f.emc_idx = static_cast<int>(device.default_emc_idx);
  return f;
}

BackboneGenome mutate_backbone(const BackboneGenome& b, const SearchSpaceSpec& space,
                               const VariationParams& params, Rng& rng) {
  BackboneGenome out = b;
  const double p = params.mutation_prob_per_gene;
  auto gene = [&](int& idx, std::size_t n) {
    if (rng.bernoulli(p)) idx = uniform_int(n, rng);
  };
  gene(out.resolution_idx, space.resolution_domain.size());
  for (auto& blk : out.blocks) {
    gene(blk.depth_idx, space.depth_domain.size());
    gene(blk.width_idx, space.width_domain.size());
    gene(blk.kernel_idx, space.kernel_domain.size());
    gene(blk.expand_idx, space.expand_domain.size());
  }
  repair_backbone(out, space, rng);
  return out;
}

ExitGenome mutate_exit(const ExitGenome& x, const VariationParams& params, Rng& rng) {
  ExitGenome out = x;
  for (auto& bit : out.bits)
    if (rng.bernoulli(params.mutation_prob_per_gene)) bit = rng.bernoulli(0.5) ? 1 : 0;
  repair_exit_genome(out, rng);
  return out;
}

DvfsGenome mutate_dvfs(const DvfsGenome& f, const SearchSpaceSpec& space,
                       const VariationParams& params, Rng& rng) {
  const DeviceSpec& device = space.device(f.device);
  DvfsGenome out = f;
  if (rng.bernoulli(params.mutation_prob_per_gene))
    out.compute_idx = uniform_int(device.compute_freq_ghz.size(), rng);
  if (device.has_emc() && rng.bernoulli(params.mutation_prob_per_gene))
    out.emc_idx = uniform_int(device.emc_freq_ghz.size(), rng);
  return out;
}

std::pair<BackboneGenome, BackboneGenome> crossover(const BackboneGenome& a, const BackboneGenome& b,
                                                    const SearchSpaceSpec& space,
                                                    const VariationParams& params, Rng& rng) {
  if (a.blocks.size() != b.blocks.size()) throw StructuralError("backbone parents differ in block count");
  BackboneGenome ca = a;
  BackboneGenome cb = b;
  auto gene = [&](int& x, int& y) {
    if (rng.bernoulli(params.crossover_prob)) std::swap(x, y);
  };
  gene(ca.resolution_idx, cb.resolution_idx);
  for (std::size_t j = 0; j < ca.blocks.size(); ++j) {
    gene(ca.blocks[j].depth_idx, cb.blocks[j].depth_idx);
    gene(ca.blocks[j].width_idx, cb.blocks[j].width_idx);
    gene(ca.blocks[j].kernel_idx, cb.blocks[j].kernel_idx);
    gene(ca.blocks[j].expand_idx, cb.blocks[j].expand_idx);
  }
  repair_backbone(ca, space, rng);
  repair_backbone(cb, space, rng);
  return {std::move(ca), std::move(cb)};
}

std::pair<ExitGenome, ExitGenome> crossover(const ExitGenome& a, const ExitGenome& b,
                                            const VariationParams& params, Rng& rng) {
  if (a.bits.size() != b.bits.size() || a.first_position != b.first_position)
    throw StructuralError("exit parents are conditioned on different backbones");
  ExitGenome ca = a;
  ExitGenome cb = b;
  for (std::size_t p = 0; p < ca.bits.size(); ++p)
    if (rng.bernoulli(params.crossover_prob)) std::swap(ca.bits[p], cb.bits[p]);
  repair_exit_genome(ca, rng);
  repair_exit_genome(cb, rng);
  return {std::move(ca), std::move(cb)};
}

std::pair<DvfsGenome, DvfsGenome> crossover(const DvfsGenome& a, const DvfsGenome& b,
                                            const VariationParams& params, Rng& rng) {
  if (a.device != b.device || a.emc_idx.has_value() != b.emc_idx.has_value())
    throw StructuralError("dvfs parents target different devices");
  DvfsGenome ca = a;
  DvfsGenome cb = b;
  if (rng.bernoulli(params.crossover_prob)) std::swap(ca.compute_idx, cb.compute_idx);
  if (ca.emc_idx && rng.bernoulli(params.crossover_prob)) std::swap(ca.emc_idx, cb.emc_idx);
  return {std::move(ca), std::move(cb)};
}

std::uint64_t backbone_cardinality(const SearchSpaceSpec& space) {
  // Counts valid genomes; saturates at UINT64_MAX.
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  auto add = [](std::uint64_t a, std::uint64_t b) { return a > kMax - b ? kMax : a + b; };
  auto mul = [](std::uint64_t a, std::uint64_t b) { return (b != 0 && a > kMax / b) ? kMax : a * b; };

  // Depth combinations by total layer count.
  const int max_total = space.n_block * space.depth_domain.back();
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(max_total) + 1, 0);
  ways[0] = 1;
  for (int j = 0; j < space.n_block; ++j) {
    std::vector<std::uint64_t> next(ways.size(), 0);
    for (std::size_t t = 0; t < ways.size(); ++t) {
      if (ways[t] == 0) continue;
      for (int d : space.depth_domain) {
        const std::size_t u = t + static_cast<std::size_t>(d);
        if (u < next.size()) next[u] = add(next[u], ways[t]);
      }
    }
    ways = std::move(next);
  }
  std::uint64_t depth_ways = 0;
  for (int t = space.exit_min_position + 1; t <= max_total; ++t)
    depth_ways = add(depth_ways, ways[static_cast<std::size_t>(t)]);

  const std::uint64_t per_block_other =
      space.width_domain.size() * space.kernel_domain.size() * space.expand_domain.size();
  std::uint64_t total = mul(depth_ways, space.resolution_domain.size());
  for (int j = 0; j < space.n_block; ++j) total = mul(total, per_block_other);
  return total;
}

std::vector<BackboneGenome> enumerate_backbones(const SearchSpaceSpec& space) {
  const std::size_t nb = static_cast<std::size_t>(space.n_block);
  const std::size_t radix[4] = {space.depth_domain.size(), space.width_domain.size(),
                                space.kernel_domain.size(), space.expand_domain.size()};
  std::vector<BackboneGenome> out;
  BackboneGenome b;
  b.blocks.resize(nb);
  // Odometer over (resolution, block genes) with the last gene fastest.
  std::vector<int> digits(1 + 4 * nb, 0);
  auto base = [&](std::size_t i) { return i == 0 ? space.resolution_domain.size() : radix[(i - 1) % 4]; };
  while (true) {
    b.resolution_idx = digits[0];
    for (std::size_t j = 0; j < nb; ++j) {
      b.blocks[j] = BlockGene{digits[1 + 4 * j], digits[2 + 4 * j], digits[3 + 4 * j], digits[4 + 4 * j]};
    }
    if (b.total_layers(space) >= space.exit_min_position + 1) out.push_back(b);
    std::size_t i = digits.size();
    while (i > 0) {
      --i;
      if (static_cast<std::size_t>(++digits[i]) < base(i)) break;
      digits[i] = 0;
      if (i == 0) return out;
    }
  }
}

std::vector<ExitGenome> enumerate_exit_genomes(const BackboneGenome& b, const SearchSpaceSpec& space) {
  const int n = b.total_layers(space) - space.exit_min_position;
  if (n < 1) throw StructuralError("backbone admits no exit position");
  if (n > 30) throw std::length_error("too many exit positions to enumerate");
  std::vector<ExitGenome> out;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    ExitGenome x;
    x.first_position = space.exit_min_position;
    x.bits.resize(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) x.bits[static_cast<std::size_t>(p)] = (mask >> p) & 1U;
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<DvfsGenome> enumerate_dvfs(const DeviceSpec& device) {
  std::vector<DvfsGenome> out;
  for (std::size_t c = 0; c < device.compute_freq_ghz.size(); ++c) {
    if (!device.has_emc()) {
      out.push_back(DvfsGenome{device.name, static_cast<int>(c), std::nullopt});
      continue;
    }
    for (std::size_t m = 0; m < device.emc_freq_ghz.size(); ++m)
      out.push_back(DvfsGenome{device.name, static_cast<int>(c), static_cast<int>(m)});
  }
  return out;
}

}  // namespace nestevo
