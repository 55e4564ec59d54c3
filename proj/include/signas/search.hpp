#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "signas/archspace.hpp"
#include "signas/evaluate.hpp"
#include "signas/netmodel.hpp"

namespace signas {

/// phi = alpha * Q + beta * (1 - S / s_max)
struct CostFunction {
    double alpha = 0.5;
    double beta = 0.5;
    double s_max = 1.0;  ///< bytes

    void validate() const;
};

/// Weighted quality/storage cost. Storage above s_max is allowed (the storage
/// term goes negative).
double fitness(double quality, double storage_bytes, const CostFunction& cf);

struct Constraints {
    std::optional<std::int64_t> s_const;  ///< max storage bytes
    std::optional<double> q_const;        ///< min quality on `metric`
    MetricChoice metric;

    void validate() const;
};

enum class Engine { exhaustive, random, roulette, tournament, nsga2, spea2 };

std::string_view to_string(Engine e);
Engine parse_engine(std::string_view name);
constexpr bool is_genetic(Engine e) { return e != Engine::exhaustive && e != Engine::random; }

enum class GaMode {
    /// Roulette and tournament use phi; NSGA-II and SPEA-2 use the objective
    /// pair (Q, 1 - S/s_max).
    objective_pair,
    /// All four selectors use phi as their single objective.
    scalarized,
};

std::string_view to_string(GaMode m);
GaMode parse_ga_mode(std::string_view name);

struct GaSettings {
    std::size_t population_size = 30;
    std::size_t generations = 5;
    double crossover_prob = 0.4;
    double mutation_prob = 0.11;
    std::uint64_t seed = 1;
    GaMode mode = GaMode::objective_pair;
    std::size_t tournament_size = 2;
    /// A child identical to one already bred this generation is re-drawn up
    /// to this many times, then admitted.
    std::size_t duplicate_retries = 8;
    /// Sample fraction for Engine::random.
    double random_fraction = 0.10;

    void validate() const;
};

struct EvaluatedPoint {
    ArchParams arch;
    double quality = 0.0;
    std::int64_t storage_bytes = 0;
    std::int64_t flops = 0;
    double fitness = 0.0;
    int generation = 0;  ///< generation in which the architecture was first evaluated

    bool operator==(const EvaluatedPoint&) const = default;
};

struct GenerationLog {
    int generation = 0;
    std::size_t new_evaluations = 0;
    std::size_t total_evaluations = 0;
    std::size_t valid_individuals = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double seconds = 0.0;
};

struct SearchResult {
    Engine engine = Engine::exhaustive;
    std::vector<EvaluatedPoint> evaluated;  ///< evaluation order
    std::vector<EvaluatedPoint> pareto;     ///< descending quality
    std::vector<EvaluatedPoint> omega;      ///< descending fitness
    std::size_t unique_eval_calls = 0;
    std::size_t space_size = 0;             ///< after the storage filter
    std::vector<GenerationLog> wall_report;
};

/// Raised when the evaluator fails mid-search. `partial` holds everything
/// evaluated before the failure; `cause` is the original EvaluatorError.
class SearchFailure : public std::runtime_error {
public:
    SearchFailure(SearchResult partial, std::exception_ptr cause, const std::string& what)
        : std::runtime_error(what), partial_(std::move(partial)), cause_(std::move(cause)) {}

    const SearchResult& partial() const noexcept { return partial_; }
    std::exception_ptr cause() const noexcept { return cause_; }

private:
    SearchResult partial_;
    std::exception_ptr cause_;
};

/// What a search explores and how it scores architectures.
struct Problem {
    ArchitectureSpace space;
    NetConfig net;
    CostFunction cost;
    MetricChoice metric;
    Evaluator* evaluator = nullptr;
};

// --- dominance machinery ---------------------------------------------------

/// Quality to maximize, storage to minimize.
struct QsPoint {
    double quality;
    double storage;
};

bool dominates(const QsPoint& a, const QsPoint& b);
/// All objectives maximized.
bool dominates(std::span<const double> a, std::span<const double> b);

struct Fronts {
    std::vector<std::vector<std::size_t>> fronts;  ///< F1, F2, ...; members ascending by index
    std::vector<std::size_t> rank;                 ///< 0-based front of each point
    std::vector<double> crowding;                  ///< within its own front; boundary = +inf
};

/// Fast non-dominated sort with crowding distances. `objectives[i]` is a
/// vector of values to maximize; all must have the same length.
Fronts nondominated_sort(std::span<const std::vector<double>> objectives);
Fronts nondominated_sort(std::span<const QsPoint> points);

struct Spea2Score {
    std::size_t strength = 0;  ///< points this one dominates
    double raw = 0.0;          ///< summed strength of its dominators
    double density = 0.0;      ///< 1 / (sigma_k + 2), k = floor(sqrt(N))
    double fitness = 0.0;      ///< raw + density; lower is better
};

std::vector<Spea2Score> spea2_fitness(std::span<const std::vector<double>> objectives);
std::vector<Spea2Score> spea2_fitness(std::span<const QsPoint> points);

/// Non-dominated subset under (higher quality, lower storage), ordered by
/// descending quality, then ascending storage, then canonical architecture.
std::vector<EvaluatedPoint> pareto_front(std::span<const EvaluatedPoint> evaluated);

// --- engines ----------------------------------------------------------------

SearchResult exhaustive(const Problem& problem);
SearchResult random_search(const Problem& problem, double fraction, std::uint64_t seed);
SearchResult ga_search(const Problem& problem, const GaSettings& settings, Engine selector);

/// Weighted search under constraints: drops members above s_const using the
/// cost model only, explores the survivors with `engine`, then keeps the
/// Pareto members meeting q_const as omega. EmptySpaceError when the storage
/// filter removes everything.
SearchResult run_algorithm1(const ArchitectureSpace& space, const CostFunction& cf,
                            const Constraints& constraints, Engine engine,
                            const GaSettings& settings, Evaluator& evaluator,
                            const NetConfig& net = {});

/// Members whose storage does not exceed s_const, in input order.
ArchitectureSpace filter_by_storage(const ArchitectureSpace& space, std::int64_t s_const,
                                    const NetConfig& net = {});

/// Evaluated points sorted by descending fitness, ties by canonical order.
std::vector<EvaluatedPoint> rank_by_fitness(std::span<const EvaluatedPoint> points);

/// CSV header: arch,B,x,z,quality,storage_bytes,flops,fitness,generation,engine
void write_points_csv(std::ostream& out, std::span<const EvaluatedPoint> points, Engine engine);

}  // namespace signas
