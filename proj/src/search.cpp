#include "signas/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include <spdlog/spdlog.h>

#include "signas/error.hpp"
#include "signas/rng.hpp"
#include "text.hpp"

namespace signas {

// ---------------------------------------------------------------------------
// Cost function and settings
// ---------------------------------------------------------------------------

void CostFunction::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0,1]");
    if (!(s_max > 0.0)) throw DomainError("s_max must be positive");
}

double fitness(double quality, double storage_bytes, const CostFunction& cf) {
    if (!(quality >= 0.0 && quality <= 1.0)) {
        throw DomainError("quality " + text::number(quality) + " outside [0,1]");
    }
    if (!(storage_bytes >= 0.0)) throw DomainError("negative storage");
    return cf.alpha * quality + cf.beta * (1.0 - storage_bytes / cf.s_max);
}

void Constraints::validate() const {
    if (s_const && *s_const < 0) throw DomainError("s_const must be non-negative");
    if (q_const && !(*q_const >= 0.0 && *q_const <= 1.0)) throw DomainError("q_const must lie in [0,1]");
}

std::string_view to_string(Engine e) {
    switch (e) {
        case Engine::exhaustive: return "exhaustive";
        case Engine::random: return "random";
        case Engine::roulette: return "roulette";
        case Engine::tournament: return "tournament";
        case Engine::nsga2: return "nsga2";
        case Engine::spea2: return "spea2";
    }
    return "?";
}

Engine parse_engine(std::string_view name) {
    for (Engine e : {Engine::exhaustive, Engine::random, Engine::roulette, Engine::tournament,
                     Engine::nsga2, Engine::spea2}) {
        if (name == to_string(e)) return e;
    }
    throw DomainError("unknown engine '" + std::string(name) + "'");
}

std::string_view to_string(GaMode m) {
    return m == GaMode::scalarized ? "scalarized" : "multi-objective";
}

GaMode parse_ga_mode(std::string_view name) {
    if (name == "scalarized") return GaMode::scalarized;
    if (name == "multi-objective" || name == "objective-pair") return GaMode::objective_pair;
    throw DomainError("unknown GA mode '" + std::string(name) + "'");
}

void GaSettings::validate() const {
    if (population_size < 2) throw DomainError("population_size must be at least 2");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw DomainError("crossover_prob outside [0,1]");
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw DomainError("mutation_prob outside [0,1]");
    if (tournament_size < 1) throw DomainError("tournament_size must be at least 1");
    if (!(random_fraction > 0.0 && random_fraction <= 1.0)) throw DomainError("random_fraction outside (0,1]");
}

// ---------------------------------------------------------------------------
// Dominance
// ---------------------------------------------------------------------------

bool dominates(const QsPoint& a, const QsPoint& b) {
    return a.quality >= b.quality && a.storage <= b.storage &&
           (a.quality > b.quality || a.storage < b.storage);
}

bool dominates(std::span<const double> a, std::span<const double> b) {
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strictly = true;
    }
    return strictly;
}

namespace {

std::vector<std::vector<double>> as_objectives(std::span<const QsPoint> points) {
    std::vector<std::vector<double>> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back({p.quality, -p.storage});
    return out;
}

void crowding_distance(std::span<const std::vector<double>> objectives,
                       const std::vector<std::size_t>& front, std::vector<double>& crowding) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i : front) crowding[i] = 0.0;
    if (front.size() <= 2) {
        for (std::size_t i : front) crowding[i] = inf;
        return;
    }
    const std::size_t dims = objectives[front.front()].size();
    std::vector<std::size_t> order(front);
    for (std::size_t m = 0; m < dims; ++m) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return objectives[a][m] < objectives[b][m];
        });
        const double lo = objectives[order.front()][m];
        const double hi = objectives[order.back()][m];
        crowding[order.front()] = inf;
        crowding[order.back()] = inf;
        if (hi <= lo) continue;
        for (std::size_t k = 1; k + 1 < order.size(); ++k) {
            crowding[order[k]] += (objectives[order[k + 1]][m] - objectives[order[k - 1]][m]) / (hi - lo);
        }
    }
}

}  // namespace

Fronts nondominated_sort(std::span<const std::vector<double>> objectives) {
    const std::size_t n = objectives.size();
    Fronts out;
    out.rank.assign(n, 0);
    out.crowding.assign(n, 0.0);
    if (n == 0) return out;

    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dominator_count(n, 0);
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(objectives[p], objectives[q])) dominated[p].push_back(q);
            else if (dominates(objectives[q], objectives[p])) ++dominator_count[p];
        }
        if (dominator_count[p] == 0) current.push_back(p);
    }

    std::size_t rank = 0;
    while (!current.empty()) {
        std::sort(current.begin(), current.end());
        std::vector<std::size_t> next;
        for (std::size_t p : current) {
            out.rank[p] = rank;
            for (std::size_t q : dominated[p]) {
                if (--dominator_count[q] == 0) next.push_back(q);
            }
        }
        crowding_distance(objectives, current, out.crowding);
        out.fronts.push_back(std::move(current));
        current = std::move(next);
        ++rank;
    }
    return out;
}

Fronts nondominated_sort(std::span<const QsPoint> points) {
    const auto objectives = as_objectives(points);
    return nondominated_sort(std::span<const std::vector<double>>(objectives));
}

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum);
}

}  // namespace

std::vector<Spea2Score> spea2_fitness(std::span<const std::vector<double>> objectives) {
    const std::size_t n = objectives.size();
    std::vector<Spea2Score> scores(n);
    if (n == 0) return scores;

    std::vector<std::vector<bool>> dom(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && dominates(objectives[i], objectives[j])) {
                dom[i][j] = true;
                ++scores[i].strength;
            }
        }
    }
    const auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    std::vector<double> dists;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (dom[j][i]) scores[i].raw += static_cast<double>(scores[j].strength);
        }
        dists.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) dists.push_back(distance(objectives[i], objectives[j]));
        }
        double sigma = 0.0;
        if (!dists.empty()) {
            const std::size_t kth = std::min(k, dists.size()) - 1;
            std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(kth), dists.end());
            sigma = dists[kth];
        }
        scores[i].density = 1.0 / (sigma + 2.0);
        scores[i].fitness = scores[i].raw + scores[i].density;
    }
    return scores;
}

std::vector<Spea2Score> spea2_fitness(std::span<const QsPoint> points) {
    const auto objectives = as_objectives(points);
    return spea2_fitness(std::span<const std::vector<double>>(objectives));
}

namespace {

bool canonical_before(const EvaluatedPoint& a, const EvaluatedPoint& b) { return a.arch < b.arch; }

}  // namespace

std::vector<EvaluatedPoint> pareto_front(std::span<const EvaluatedPoint> evaluated) {
    std::vector<EvaluatedPoint> front;
    for (std::size_t i = 0; i < evaluated.size(); ++i) {
        const QsPoint pi{evaluated[i].quality, static_cast<double>(evaluated[i].storage_bytes)};
        bool dominated = false;
        for (std::size_t j = 0; j < evaluated.size() && !dominated; ++j) {
            const QsPoint pj{evaluated[j].quality, static_cast<double>(evaluated[j].storage_bytes)};
            dominated = j != i && dominates(pj, pi);
        }
        if (!dominated) front.push_back(evaluated[i]);
    }
    std::sort(front.begin(), front.end(), [](const EvaluatedPoint& a, const EvaluatedPoint& b) {
        if (a.quality != b.quality) return a.quality > b.quality;
        if (a.storage_bytes != b.storage_bytes) return a.storage_bytes < b.storage_bytes;
        return canonical_before(a, b);
    });
    return front;
}

std::vector<EvaluatedPoint> rank_by_fitness(std::span<const EvaluatedPoint> points) {
    std::vector<EvaluatedPoint> out(points.begin(), points.end());
    std::sort(out.begin(), out.end(), [](const EvaluatedPoint& a, const EvaluatedPoint& b) {
        if (a.fitness != b.fitness) return a.fitness > b.fitness;
        return canonical_before(a, b);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation bookkeeping shared by every engine
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kFamilySize = 320;

class Ledger {
public:
    Ledger(const Problem& problem, Engine engine) : problem_(problem), engine_(engine) {
        if (!problem.evaluator) throw DomainError("search problem has no evaluator");
        if (problem.space.empty()) throw EmptySpaceError("architecture space is empty");
        problem.cost.validate();
        member_.assign(kFamilySize, false);
        costs_.resize(kFamilySize);
        for (const auto& arch : problem.space) {
            if (!arch.valid()) throw DomainError("space contains invalid architecture " + to_string(arch));
            if (member_[arch.index()]) continue;
            member_[arch.index()] = true;
            space_size_++;
            const auto summary = build(arch, problem.net);
            costs_[arch.index()] = {summary.storage_bytes, summary.flops};
        }
        seen_.assign(kFamilySize, std::nullopt);
    }

    bool in_space(const ArchParams& arch) const { return arch.valid() && member_[arch.index()]; }

    const EvaluatedPoint* find(const ArchParams& arch) const {
        const auto slot = seen_[arch.index()];
        return slot ? &points_[*slot] : nullptr;
    }

    /// Evaluates the architectures not seen before, in first-occurrence order.
    /// Returns the number of new evaluations.
    std::size_t evaluate(std::span<const ArchParams> archs, int generation) {
        std::vector<ArchParams> fresh;
        std::vector<bool> queued(kFamilySize, false);
        for (const auto& arch : archs) {
            if (!in_space(arch) || seen_[arch.index()] || queued[arch.index()]) continue;
            queued[arch.index()] = true;
            fresh.push_back(arch);
        }
        if (fresh.empty()) return 0;

        std::vector<std::optional<QualityReport>> reports(fresh.size());
        std::exception_ptr failure;
        std::string message;
        try {
            problem_.evaluator->evaluate_batch(
                fresh, [&](std::size_t i, const QualityReport& q) { reports[i] = q; });
        } catch (const std::exception& e) {
            failure = std::current_exception();
            message = e.what();
        }
        // Commit in request order so the ledger never depends on completion order.
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            if (reports[i]) commit(fresh[i], *reports[i], generation);
        }
        if (failure) throw SearchFailure(result(), failure, "evaluator failure: " + message);
        return fresh.size();
    }

    std::size_t size() const { return points_.size(); }
    std::size_t space_size() const { return space_size_; }

    SearchResult result() const {
        SearchResult r;
        r.engine = engine_;
        r.evaluated = points_;
        r.pareto = pareto_front(points_);
        r.omega = rank_by_fitness(r.pareto);
        r.unique_eval_calls = points_.size();
        r.space_size = space_size_;
        return r;
    }

private:
    void commit(const ArchParams& arch, const QualityReport& report, int generation) {
        const auto& c = costs_[arch.index()];
        EvaluatedPoint p;
        p.arch = arch;
        p.quality = problem_.metric.extract(report);
        p.storage_bytes = c.storage;
        p.flops = c.flops;
        p.fitness = fitness(p.quality, static_cast<double>(c.storage), problem_.cost);
        p.generation = generation;
        if (static_cast<double>(c.storage) > problem_.cost.s_max) {
            spdlog::warn("{} stores {} bytes, above S_MAX {}; storage term is negative",
                         to_string(arch), c.storage, problem_.cost.s_max);
        }
        seen_[arch.index()] = points_.size();
        points_.push_back(p);
    }

    struct Cost {
        std::int64_t storage = 0;
        std::int64_t flops = 0;
    };

    const Problem& problem_;
    Engine engine_;
    std::vector<bool> member_;
    std::vector<Cost> costs_;
    std::vector<std::optional<std::size_t>> seen_;
    std::vector<EvaluatedPoint> points_;
    std::size_t space_size_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

GenerationLog summarize(int generation, std::size_t fresh, const Ledger& ledger,
                        std::span<const double> fitnesses, std::size_t valid,
                        std::chrono::steady_clock::time_point start) {
    GenerationLog log;
    log.generation = generation;
    log.new_evaluations = fresh;
    log.total_evaluations = ledger.size();
    log.valid_individuals = valid;
    if (!fitnesses.empty()) {
        log.best_fitness = *std::max_element(fitnesses.begin(), fitnesses.end());
        log.mean_fitness = std::accumulate(fitnesses.begin(), fitnesses.end(), 0.0) /
                           static_cast<double>(fitnesses.size());
    }
    log.seconds = seconds_since(start);
    return log;
}

}  // namespace

// ---------------------------------------------------------------------------
// Exhaustive and random baselines
// ---------------------------------------------------------------------------

SearchResult exhaustive(const Problem& problem) {
    const auto start = std::chrono::steady_clock::now();
    Ledger ledger(problem, Engine::exhaustive);
    const std::size_t fresh = ledger.evaluate(problem.space, 0);
    auto result = ledger.result();
    std::vector<double> fit;
    for (const auto& p : result.evaluated) fit.push_back(p.fitness);
    result.wall_report.push_back(summarize(0, fresh, ledger, fit, fit.size(), start));
    return result;
}

SearchResult random_search(const Problem& problem, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("random fraction outside (0,1]");
    const auto start = std::chrono::steady_clock::now();
    Ledger ledger(problem, Engine::random);

    std::vector<ArchParams> members;
    {
        std::set<ArchParams> unique;
        for (const auto& a : problem.space) {
            if (unique.insert(a).second) members.push_back(a);
        }
    }
    // ceil() with slack for products like 0.1 * 320 landing a hair above an integer.
    auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(members.size()) - 1e-9));
    count = std::clamp<std::size_t>(count, 1, members.size());

    Rng rng = Rng::stream(seed, 0x5A3D);
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(members.size() - i));
        std::swap(members[i], members[j]);
    }
    members.resize(count);

    const std::size_t fresh = ledger.evaluate(members, 0);
    auto result = ledger.result();
    std::vector<double> fit;
    for (const auto& p : result.evaluated) fit.push_back(p.fitness);
    result.wall_report.push_back(summarize(0, fresh, ledger, fit, fit.size(), start));
    return result;
}

// ---------------------------------------------------------------------------
// Genetic algorithms
// ---------------------------------------------------------------------------

namespace {

struct Individual {
    Chromosome genome;
    bool valid = false;
    ArchParams arch;
    double fitness = 0.0;
    std::vector<double> objectives;
};

class GeneticSearch {
public:
    GeneticSearch(const Problem& problem, const GaSettings& settings, Engine selector)
        : problem_(problem),
          settings_(settings),
          selector_(selector),
          ledger_(problem, selector),
          rng_(Rng::stream(settings.seed, static_cast<std::uint64_t>(selector) + 0x6A)) {
        settings_.validate();
        if (!is_genetic(selector)) throw DomainError("ga_search needs a genetic selector");
        pair_objectives_ = settings_.mode == GaMode::objective_pair &&
                           (selector == Engine::nsga2 || selector == Engine::spea2);
    }

    SearchResult run() {
        const auto start = std::chrono::steady_clock::now();
        std::vector<SearchResult> unused;
        std::vector<GenerationLog> logs;

        std::vector<Individual> population;
        for (std::size_t i = 0; i < settings_.population_size; ++i) {
            population.push_back(make(Chromosome(static_cast<std::uint16_t>(rng_.below(1u << Chromosome::kLength)))));
        }
        std::size_t fresh = score(population, 0, logs);
        logs.push_back(log_for(0, fresh, population, start));

        for (std::size_t g = 1; g <= settings_.generations; ++g) {
            const auto gen = static_cast<int>(g);
            auto offspring = breed(population);
            fresh = score(offspring, gen, logs);
            std::vector<Individual> combined = std::move(population);
            combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                            std::make_move_iterator(offspring.end()));
            population = survive(std::move(combined));
            logs.push_back(log_for(gen, fresh, population, start));
        }

        auto result = ledger_.result();
        result.wall_report = std::move(logs);
        return result;
    }

private:
    Individual make(Chromosome genome) const {
        Individual ind;
        ind.genome = genome;
        if (auto arch = decode(genome); arch && ledger_.in_space(*arch)) {
            ind.valid = true;
            ind.arch = *arch;
        }
        return ind;
    }

    /// Evaluates unseen valid members, then assigns fitness and objectives.
    /// Invalid and out-of-space genomes score zero.
    std::size_t score(std::vector<Individual>& pop, int generation, std::vector<GenerationLog>& logs) {
        std::vector<ArchParams> archs;
        for (const auto& ind : pop) {
            if (ind.valid) archs.push_back(ind.arch);
        }
        std::size_t fresh = 0;
        try {
            fresh = ledger_.evaluate(archs, generation);
        } catch (SearchFailure& failure) {
            auto partial = failure.partial();
            partial.wall_report = logs;
            throw SearchFailure(std::move(partial), failure.cause(), failure.what());
        }
        for (auto& ind : pop) {
            if (ind.valid) {
                const auto* p = ledger_.find(ind.arch);
                ind.fitness = p->fitness;
                if (pair_objectives_) {
                    ind.objectives = {p->quality,
                                      1.0 - static_cast<double>(p->storage_bytes) / problem_.cost.s_max};
                } else {
                    ind.objectives = {p->fitness};
                }
            } else {
                ind.fitness = 0.0;
                ind.objectives.assign(pair_objectives_ ? 2 : 1, 0.0);
            }
        }
        return fresh;
    }

    GenerationLog log_for(int generation, std::size_t fresh, const std::vector<Individual>& pop,
                          std::chrono::steady_clock::time_point start) const {
        std::vector<double> fit;
        std::size_t valid = 0;
        for (const auto& ind : pop) {
            fit.push_back(ind.fitness);
            valid += ind.valid ? 1 : 0;
        }
        return summarize(generation, fresh, ledger_, fit, valid, start);
    }

    // --- parent selection ---------------------------------------------------

    struct SelectionState {
        std::vector<double> cumulative;   // roulette
        Fronts fronts;                    // nsga2
        std::vector<Spea2Score> spea2;    // spea2
    };

    std::vector<std::vector<double>> objectives_of(const std::vector<Individual>& pop) const {
        std::vector<std::vector<double>> obj;
        obj.reserve(pop.size());
        for (const auto& ind : pop) obj.push_back(ind.objectives);
        return obj;
    }

    SelectionState prepare(const std::vector<Individual>& pop) const {
        SelectionState state;
        switch (selector_) {
            case Engine::roulette: {
                double lowest = 0.0;
                for (const auto& ind : pop) lowest = std::min(lowest, ind.fitness);
                double total = 0.0;
                for (const auto& ind : pop) {
                    total += ind.fitness - lowest;
                    state.cumulative.push_back(total);
                }
                break;
            }
            case Engine::nsga2: {
                const auto obj = objectives_of(pop);
                state.fronts = nondominated_sort(std::span<const std::vector<double>>(obj));
                break;
            }
            case Engine::spea2: {
                const auto obj = objectives_of(pop);
                state.spea2 = spea2_fitness(std::span<const std::vector<double>>(obj));
                break;
            }
            default:
                break;
        }
        return state;
    }

    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_.below(n)); }

    std::size_t select_parent(const std::vector<Individual>& pop, const SelectionState& state) {
        const std::size_t n = pop.size();
        switch (selector_) {
            case Engine::roulette: {
                const double total = state.cumulative.back();
                if (total <= 0.0) return pick(n);
                const double r = rng_.uniform() * total;
                auto it = std::upper_bound(state.cumulative.begin(), state.cumulative.end(), r);
                return std::min(static_cast<std::size_t>(it - state.cumulative.begin()), n - 1);
            }
            case Engine::tournament: {
                std::size_t best = pick(n);
                for (std::size_t t = 1; t < settings_.tournament_size; ++t) {
                    const std::size_t c = pick(n);
                    if (pop[c].fitness > pop[best].fitness) best = c;
                }
                return best;
            }
            case Engine::nsga2: {
                const std::size_t a = pick(n);
                const std::size_t b = pick(n);
                const auto& f = state.fronts;
                if (f.rank[b] < f.rank[a] || (f.rank[b] == f.rank[a] && f.crowding[b] > f.crowding[a])) {
                    return b;
                }
                return a;
            }
            case Engine::spea2: {
                const std::size_t a = pick(n);
                const std::size_t b = pick(n);
                return state.spea2[b].fitness < state.spea2[a].fitness ? b : a;
            }
            default:
                return pick(n);
        }
    }

    // --- variation ----------------------------------------------------------

    /// Single-point crossover exchanging the genes before a uniform cut in
    /// [1, 8], then a Bernoulli(mutation_prob) flip of one uniform bit per child.
    std::pair<Chromosome, Chromosome> vary(Chromosome a, Chromosome b) {
        if (rng_.bernoulli(settings_.crossover_prob)) {
            const int cut = 1 + static_cast<int>(rng_.below(Chromosome::kLength - 1));
            const auto prefix = static_cast<std::uint16_t>(Chromosome::kMask & ~((1u << (Chromosome::kLength - cut)) - 1));
            const auto suffix = static_cast<std::uint16_t>(Chromosome::kMask & ~prefix);
            const Chromosome ca(static_cast<std::uint16_t>((b.bits() & prefix) | (a.bits() & suffix)));
            const Chromosome cb(static_cast<std::uint16_t>((a.bits() & prefix) | (b.bits() & suffix)));
            a = ca;
            b = cb;
        }
        if (rng_.bernoulli(settings_.mutation_prob)) a = a.with_flipped(static_cast<int>(rng_.below(Chromosome::kLength)));
        if (rng_.bernoulli(settings_.mutation_prob)) b = b.with_flipped(static_cast<int>(rng_.below(Chromosome::kLength)));
        return {a, b};
    }

    std::vector<Individual> breed(const std::vector<Individual>& pop) {
        const auto state = prepare(pop);
        std::vector<Individual> children;
        std::set<Chromosome> bred;
        std::size_t retries = 0;
        while (children.size() < settings_.population_size) {
            const auto& p1 = pop[select_parent(pop, state)];
            const auto& p2 = pop[select_parent(pop, state)];
            const auto [c1, c2] = vary(p1.genome, p2.genome);
            for (Chromosome c : {c1, c2}) {
                if (children.size() == settings_.population_size) break;
                if (bred.contains(c) && retries < settings_.duplicate_retries) {
                    ++retries;
                    continue;
                }
                retries = 0;
                bred.insert(c);
                children.push_back(make(c));
            }
        }
        return children;
    }

    // --- environmental selection -------------------------------------------

    std::vector<std::size_t> truncate_nsga2(const std::vector<Individual>& pool,
                                            const std::vector<std::size_t>& candidates) const {
        std::vector<std::vector<double>> obj;
        for (std::size_t i : candidates) obj.push_back(pool[i].objectives);
        const auto fronts = nondominated_sort(std::span<const std::vector<double>>(obj));
        std::vector<std::size_t> chosen;
        for (const auto& front : fronts.fronts) {
            if (chosen.size() + front.size() <= settings_.population_size) {
                for (std::size_t k : front) chosen.push_back(candidates[k]);
                continue;
            }
            std::vector<std::size_t> order(front);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return fronts.crowding[a] > fronts.crowding[b];
            });
            for (std::size_t k : order) {
                if (chosen.size() == settings_.population_size) break;
                chosen.push_back(candidates[k]);
            }
            break;
        }
        return chosen;
    }

    std::vector<std::size_t> truncate_spea2(const std::vector<Individual>& pool,
                                            const std::vector<std::size_t>& candidates) const {
        std::vector<std::vector<double>> obj;
        for (std::size_t i : candidates) obj.push_back(pool[i].objectives);
        const auto scores = spea2_fitness(std::span<const std::vector<double>>(obj));
        const std::size_t target = settings_.population_size;

        std::vector<std::size_t> archive;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (scores[k].fitness < 1.0) archive.push_back(k);
        }
        if (archive.size() < target) {
            std::vector<std::size_t> rest;
            for (std::size_t k = 0; k < candidates.size(); ++k) {
                if (scores[k].fitness >= 1.0) rest.push_back(k);
            }
            std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
                return scores[a].fitness < scores[b].fitness;
            });
            for (std::size_t k : rest) {
                if (archive.size() == target) break;
                archive.push_back(k);
            }
        }
        // Archive truncation: repeatedly drop the member whose sorted
        // distance list to the others is lexicographically smallest.
        while (archive.size() > target) {
            std::size_t victim = 0;
            std::vector<double> victim_dists;
            for (std::size_t a = 0; a < archive.size(); ++a) {
                std::vector<double> d;
                for (std::size_t b = 0; b < archive.size(); ++b) {
                    if (a != b) d.push_back(distance(obj[archive[a]], obj[archive[b]]));
                }
                std::sort(d.begin(), d.end());
                if (a == 0 || d < victim_dists) {
                    victim = a;
                    victim_dists = std::move(d);
                }
            }
            archive.erase(archive.begin() + static_cast<std::ptrdiff_t>(victim));
        }
        std::vector<std::size_t> chosen;
        for (std::size_t k : archive) chosen.push_back(candidates[k]);
        return chosen;
    }

    /// Truncates parents + offspring back to population_size. Distinct
    /// genomes are preferred; duplicates only pad a short pool. The best-phi
    /// individual always survives.
    std::vector<Individual> survive(std::vector<Individual> pool) const {
        std::vector<std::size_t> unique;
        std::vector<std::size_t> duplicates;
        std::set<Chromosome> seen;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            (seen.insert(pool[i].genome).second ? unique : duplicates).push_back(i);
        }

        std::vector<std::size_t> chosen;
        const std::size_t target = settings_.population_size;
        if (unique.size() <= target) {
            chosen = unique;
            for (std::size_t i : duplicates) {
                if (chosen.size() == target) break;
                chosen.push_back(i);
            }
        } else if (selector_ == Engine::nsga2) {
            chosen = truncate_nsga2(pool, unique);
        } else if (selector_ == Engine::spea2) {
            chosen = truncate_spea2(pool, unique);
        } else {
            chosen = unique;
            std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
                return pool[a].fitness > pool[b].fitness;
            });
            chosen.resize(target);
        }

        std::size_t best = 0;
        for (std::size_t i = 1; i < pool.size(); ++i) {
            if (pool[i].fitness > pool[best].fitness) best = i;
        }
        const bool kept = std::any_of(chosen.begin(), chosen.end(), [&](std::size_t i) {
            return pool[i].genome == pool[best].genome;
        });
        if (!kept) chosen.back() = best;

        std::vector<Individual> next;
        next.reserve(chosen.size());
        for (std::size_t i : chosen) next.push_back(pool[i]);
        return next;
    }

    const Problem& problem_;
    GaSettings settings_;
    Engine selector_;
    Ledger ledger_;
    Rng rng_;
    bool pair_objectives_ = false;
};

}  // namespace

SearchResult ga_search(const Problem& problem, const GaSettings& settings, Engine selector) {
    return GeneticSearch(problem, settings, selector).run();
}

// ---------------------------------------------------------------------------
// Constrained weighted search
// ---------------------------------------------------------------------------

ArchitectureSpace filter_by_storage(const ArchitectureSpace& space, std::int64_t s_const,
                                    const NetConfig& net) {
    ArchitectureSpace kept;
    for (const auto& arch : space) {
        if (build(arch, net).storage_bytes <= s_const) kept.push_back(arch);
    }
    return kept;
}

SearchResult run_algorithm1(const ArchitectureSpace& space, const CostFunction& cf,
                            const Constraints& constraints, Engine engine,
                            const GaSettings& settings, Evaluator& evaluator, const NetConfig& net) {
    cf.validate();
    constraints.validate();
    settings.validate();

    Problem problem;
    problem.space = constraints.s_const ? filter_by_storage(space, *constraints.s_const, net) : space;
    if (problem.space.empty()) {
        throw EmptySpaceError("no architecture satisfies the storage constraint" +
                              (constraints.s_const ? " of " + std::to_string(*constraints.s_const) + " bytes"
                                                   : std::string()));
    }
    problem.net = net;
    problem.cost = cf;
    problem.metric = constraints.metric;
    problem.evaluator = &evaluator;

    SearchResult result;
    switch (engine) {
        case Engine::exhaustive: result = exhaustive(problem); break;
        case Engine::random: result = random_search(problem, settings.random_fraction, settings.seed); break;
        default: result = ga_search(problem, settings, engine); break;
    }

    result.omega.clear();
    for (const auto& p : result.pareto) {
        if (constraints.q_const && p.quality < *constraints.q_const) continue;
        if (constraints.s_const && p.storage_bytes > *constraints.s_const) continue;
        result.omega.push_back(p);
    }
    result.omega = rank_by_fitness(result.omega);
    return result;
}

void write_points_csv(std::ostream& out, std::span<const EvaluatedPoint> points, Engine engine) {
    out << "arch,B,x,z,quality,storage_bytes,flops,fitness,generation,engine\n";
    for (const auto& p : points) {
        out << encode(p.arch).to_string() << ',' << p.arch.blocks << ',' << p.arch.filter_interval
            << ',' << p.arch.lstm_exp << ',' << text::number(p.quality) << ',' << p.storage_bytes
            << ',' << p.flops << ',' << text::number(p.fitness) << ',' << p.generation << ','
            << to_string(engine) << '\n';
    }
}

}  // namespace signas
