#include "damo/simdyn.hpp"

#include "damo/error.hpp"
#include "damo/parallel.hpp"
#include "damo/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace damo::simdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct KindWeights {
    double enhancement;
    double conflict;
    double neutral;
    double overfitting;
};

Interaction draw_kind(Rng& rng, const KindWeights& w)
{
    const double total = w.enhancement + w.conflict + w.neutral + w.overfitting;
    double u = uniform_unit(rng) * total;
    if ((u -= w.enhancement) < 0.0) {
        return Interaction::enhancement;
    }
    if ((u -= w.conflict) < 0.0) {
        return Interaction::conflict;
    }
    if ((u -= w.neutral) < 0.0) {
        return Interaction::neutral;
    }
    return Interaction::overfitting;
}

std::string make_id(std::string_view label, std::uint64_t seed)
{
    std::ostringstream out;
    out << "oracle-" << label << '-' << std::hex << seed;
    return out.str();
}

// Uniform in [-1, 1], a function of (seed, p, t, T, task) only.
double hashed_noise(std::uint64_t seed, const MixtureProportion& p, std::uint32_t t, std::uint32_t total,
                    std::size_t task)
{
    std::uint64_t h = mix64(seed);
    for (double v : p.values()) {
        h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
    }
    h = mix64(h ^ (static_cast<std::uint64_t>(t) << 32 | total));
    h = mix64(h ^ task);
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

std::vector<double> raw_scores(const OracleSpec& spec, const MixtureProportion& p, double progress)
{
    std::vector<double> s(spec.base.begin(), spec.base.end());
    for (std::size_t i = 0; i < spec.m; ++i) {
        const double pi = p[i];
        for (std::size_t j = 0; j < spec.k; ++j) {
            const double g = spec.gain(i, j);
            if (g == 0.0) {
                continue;
            }
            s[j] += g * kernel(spec.kind(i, j), pi * progress / spec.tau(i, j));
        }
    }
    for (const auto& c : spec.cross) {
        s[c.task] += c.weight * p[c.first] * p[c.second] * std::sin(kTwoPi * c.frequency * progress + c.phase);
    }
    return s;
}

void require_point_dims(const OracleSpec& spec, std::size_t dims)
{
    if (dims != spec.m) {
        throw DomainError("oracle: mixture has " + std::to_string(dims) + " entries, oracle expects m = " +
                          std::to_string(spec.m));
    }
}

struct Candidate {
    std::uint64_t index = 0;
    std::size_t step = 0;
    double average = -1.0;
    bool valid = false;
};

// Higher average wins; ties go to the smaller lattice index (lexicographic
// order) and then the earlier step.
bool better(const Candidate& a, const Candidate& b)
{
    if (!b.valid) {
        return a.valid;
    }
    if (!a.valid) {
        return false;
    }
    if (a.average != b.average) {
        return a.average > b.average;
    }
    if (a.index != b.index) {
        return a.index < b.index;
    }
    return a.step < b.step;
}

std::uint64_t checked_evaluations(const OracleSpec& spec, std::uint32_t b, const StepGrid& grid, std::uint64_t budget)
{
    spec.validate();
    if (grid.empty()) {
        throw DomainError("brute force: step grid is empty");
    }
    const auto size = mixspace::lattice_size(spec.m, b);
    const auto evaluations = size * grid.size();
    if (evaluations > budget) {
        std::ostringstream msg;
        msg << "brute force: lattice (" << size << " points) x " << grid.size() << " steps = " << evaluations
            << " evaluations exceeds the budget of " << budget
            << "; reduce b or m, shrink the step grid, or raise the budget";
        throw BudgetError(msg.str());
    }
    return mixspace::lattice_size_u64(spec.m, b);
}

} // namespace

std::string_view to_string(Interaction kind) noexcept
{
    switch (kind) {
    case Interaction::enhancement:
        return "enhancement";
    case Interaction::conflict:
        return "conflict";
    case Interaction::neutral:
        return "neutral";
    case Interaction::overfitting:
        return "overfitting";
    }
    return "neutral";
}

std::string_view to_string(Preset preset) noexcept
{
    return preset == Preset::smooth ? "smooth" : "rugged";
}

Interaction parse_interaction(std::string_view name)
{
    for (auto kind : {Interaction::enhancement, Interaction::conflict, Interaction::neutral, Interaction::overfitting}) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw DomainError("unknown interaction kind '" + std::string(name) + "'");
}

Preset parse_preset(std::string_view name)
{
    if (name == "smooth") {
        return Preset::smooth;
    }
    if (name == "rugged") {
        return Preset::rugged;
    }
    throw DomainError("unknown preset '" + std::string(name) + "' (expected smooth or rugged)");
}

double kernel(Interaction kind, double x) noexcept
{
    switch (kind) {
    case Interaction::enhancement:
        return -std::expm1(-x);
    case Interaction::conflict:
        return std::expm1(-x);
    case Interaction::neutral:
        return 0.0;
    case Interaction::overfitting:
        return x * std::exp(1.0 - x);
    }
    return 0.0;
}

void OracleSpec::validate() const
{
    if (m == 0 || k == 0) {
        throw DomainError("oracle spec: m and k must be >= 1");
    }
    if (kinds.size() != m * k || strength.size() != m * k || timescale.size() != m * k) {
        throw DomainError("oracle spec: interaction tables must have m x k entries");
    }
    if (base.size() != k) {
        throw DomainError("oracle spec: base must have k entries");
    }
    for (std::size_t n = 0; n < m * k; ++n) {
        if (!(strength[n] >= 0.0 && strength[n] <= 1.0)) {
            throw DomainError("oracle spec: strengths must lie in [0, 1]");
        }
        if (!(timescale[n] > 0.0) || !std::isfinite(timescale[n])) {
            throw DomainError("oracle spec: timescales must be positive");
        }
    }
    for (double a : base) {
        if (!(a >= 0.0 && a <= 1.0)) {
            throw DomainError("oracle spec: base scores must lie in [0, 1]");
        }
    }
    for (const auto& c : cross) {
        if (c.first >= m || c.second >= m || c.task >= k) {
            throw DomainError("oracle spec: cross-term index out of range");
        }
        if (!std::isfinite(c.weight) || !std::isfinite(c.frequency) || !std::isfinite(c.phase)) {
            throw DomainError("oracle spec: cross-term values must be finite");
        }
    }
    if (!(noise >= 0.0) || !std::isfinite(noise)) {
        throw DomainError("oracle spec: noise amplitude must be >= 0");
    }
    if (target) {
        if (target->scale.size() != k || target->offset.size() != k) {
            throw DomainError("oracle spec: affine target must have k scales and offsets");
        }
    }
}

OracleSpec make_oracle(std::size_t m, std::size_t k, std::uint64_t seed, Preset preset)
{
    if (m == 0 || k == 0) {
        throw DomainError("make_oracle: m and k must be >= 1");
    }
    OracleSpec spec;
    spec.m = m;
    spec.k = k;
    spec.seed = seed;
    spec.id = make_id(to_string(preset), seed);

    const KindWeights weights = preset == Preset::smooth ? KindWeights{0.4, 0.2, 0.2, 0.2}
                                                         : KindWeights{0.3, 0.2, 0.2, 0.3};
    // Keep the summed kernel contribution comparable across m.
    const double gain_scale = std::min(1.0, 4.0 / static_cast<double>(m));

    Rng rng(derive_seed(seed, 0x0dac1eULL));
    spec.base.resize(k);
    for (auto& a : spec.base) {
        a = uniform_real(rng, 0.25, 0.45);
    }
    spec.kinds.resize(m * k);
    spec.strength.resize(m * k);
    spec.timescale.resize(m * k);
    for (std::size_t n = 0; n < m * k; ++n) {
        spec.kinds[n] = draw_kind(rng, weights);
        spec.strength[n] = gain_scale * uniform_real(rng, 0.05, 0.35);
        spec.timescale[n] = uniform_real(rng, 0.1, 0.5);
    }

    if (preset == Preset::rugged) {
        spec.noise = 0.01;
        if (m >= 2) {
            for (std::size_t j = 0; j < k; ++j) {
                for (int c = 0; c < 3; ++c) {
                    CrossTerm term;
                    term.first = uniform_index(rng, m);
                    term.second = (term.first + 1 + uniform_index(rng, m - 1)) % m;
                    if (term.first > term.second) {
                        std::swap(term.first, term.second);
                    }
                    term.task = j;
                    const double magnitude = uniform_real(rng, 0.3, 0.8);
                    term.weight = (rng() & 1U) ? magnitude : -magnitude;
                    term.frequency = uniform_real(rng, 0.75, 2.5);
                    term.phase = uniform_real(rng, 0.0, kTwoPi);
                    spec.cross.push_back(term);
                }
            }
        }
    }
    return spec;
}

OracleSpec make_kernel_oracle(std::size_t m, std::size_t k, std::uint64_t seed, Interaction kind)
{
    OracleSpec spec = make_oracle(m, k, seed, Preset::smooth);
    std::fill(spec.kinds.begin(), spec.kinds.end(), kind);
    spec.id = make_id(to_string(kind), seed);
    return spec;
}

OracleSpec make_affine_target(const OracleSpec& base, AffineTarget target, double noise, std::uint64_t seed)
{
    OracleSpec spec = base;
    spec.target = std::move(target);
    spec.noise = noise;
    spec.seed = seed;
    spec.id = base.id + "-target-" + make_id("affine", seed).substr(7);
    spec.validate();
    return spec;
}

std::vector<double> oracle_eval(const OracleSpec& spec, const MixtureProportion& p, std::uint32_t t,
                                std::uint32_t total_steps)
{
    require_point_dims(spec, p.dims());
    if (total_steps == 0 || t == 0 || t > total_steps) {
        throw DomainError("oracle: step " + std::to_string(t) + " outside (0, " + std::to_string(total_steps) + "]");
    }
    const double progress = static_cast<double>(t) / static_cast<double>(total_steps);
    std::vector<double> s = raw_scores(spec, p, progress);
    for (std::size_t j = 0; j < spec.k; ++j) {
        double v = s[j];
        if (spec.target) {
            v = spec.target->scale[j] * std::clamp(v, 0.0, 1.0) + spec.target->offset[j];
        }
        if (spec.noise > 0.0) {
            v += spec.noise * hashed_noise(spec.seed, p, t, total_steps, j);
        }
        s[j] = std::clamp(v, 0.0, 1.0);
    }
    return s;
}

double oracle_average(const OracleSpec& spec, const MixtureProportion& p, std::uint32_t t, std::uint32_t total_steps)
{
    const auto s = oracle_eval(spec, p, t, total_steps);
    double sum = 0.0;
    for (double v : s) {
        sum += v;
    }
    return sum / static_cast<double>(s.size());
}

BruteForceResult brute_force_best(const OracleSpec& spec, std::uint32_t b, const StepGrid& grid,
                                  std::uint64_t budget, std::size_t shards)
{
    const std::uint64_t size = checked_evaluations(spec, b, grid, budget);
    shards = std::max<std::size_t>(1, std::min<std::uint64_t>(shards, size));

    std::vector<Candidate> best(shards);
    parallel_for(shards, worker_count(), [&](std::size_t shard) {
        const std::uint64_t begin = size * shard / shards;
        const std::uint64_t end = size * (shard + 1) / shards;
        LatticePoint point = mixspace::unrank_lattice(begin, spec.m, b);
        Candidate local;
        for (std::uint64_t index = begin; index < end; ++index) {
            const auto p = mixspace::to_proportions(point);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                Candidate c{index, g, oracle_average(spec, p, grid[g], grid.total_steps()), true};
                if (better(c, local)) {
                    local = c;
                }
            }
            mixspace::next_point(point);
        }
        best[shard] = local;
    });

    Candidate winner;
    for (const auto& c : best) {
        if (better(c, winner)) {
            winner = c;
        }
    }
    return {mixspace::unrank_lattice(winner.index, spec.m, b), grid[winner.step], winner.average};
}

std::vector<double> true_average_table(const OracleSpec& spec, std::uint32_t b, const StepGrid& grid,
                                       std::uint64_t budget)
{
    const std::uint64_t size = checked_evaluations(spec, b, grid, budget);
    std::vector<double> table;
    table.reserve(size * grid.size());
    for (const auto& point : mixspace::enumerate_lattice(spec.m, b)) {
        const auto p = mixspace::to_proportions(point);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            table.push_back(oracle_average(spec, p, grid[g], grid.total_steps()));
        }
    }
    return table;
}

} // namespace damo::simdyn
