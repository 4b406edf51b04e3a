#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iscs/grouping.hpp"

namespace iscs {

struct CostModel {
    double base_per_slice = 1.0;
    double per_channel = 0.05;
    double sync_overhead = 2.0; // charged once per chain, when the chain joins

    double slice_cost(std::size_t channels) const noexcept { return base_per_slice + per_channel * channels; }
    void validate() const;
};

/// "base,per_channel,sync"
CostModel parse_cost_model(const std::string& text);

struct SliceTask {
    std::size_t id = 0;
    std::size_t group = 0; // chain index
    std::size_t slice = 0; // position within the chain
    std::size_t channels = 0;
    double cost = 0.0;
};

enum class DagMode { Flat, Grouped };

// Disjoint chains of slice tasks. Task ids are dense and chains are stored in order.
struct TaskDag {
    DagMode mode = DagMode::Flat;
    std::vector<SliceTask> tasks;
    std::vector<std::vector<std::size_t>> chains; // task ids per chain, in dependency order

    std::size_t edge_count() const noexcept;
    /// Predecessor edges (from, to).
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;
    double total_work() const noexcept;
};

/// One chain of `slices` tasks sharing `channels` as evenly as possible (earlier slices get
/// the remainder). Requires slices >= 1.
TaskDag build_flat_dag(std::size_t slices, std::size_t channels, const CostModel& cost);

/// One chain per group of the plan, plus one chain for bias and residual channels cut into
/// slices of the plan's slice width.
TaskDag build_grouped_dag(const GroupingPlan& plan, const CostModel& cost);

/// Same shape as a grouped DAG but with explicit per-chain slice sizes. Used by tests.
TaskDag build_chain_dag(const std::vector<std::vector<double>>& chain_costs, DagMode mode);

/// Slice tasks a grouped DAG would contain, so the flat baseline can match its work.
std::size_t grouped_task_count(const GroupingPlan& plan);

struct TraceEntry {
    std::size_t task = 0;
    std::size_t worker = 0;
    double start = 0.0;
    double end = 0.0; // includes the chain's join overhead on its last task
};

struct ScheduleReport {
    double makespan = 0.0;
    double total_work = 0.0; // sum of task costs, join overhead excluded
    double speedup_vs_flat_serial = 0.0;
    std::vector<double> chain_critical_path; // per chain, join overhead included
    std::vector<TraceEntry> trace;           // ordered by task id
};

/// Greedy list scheduling on `workers` identical workers. At each event time ready tasks go
/// to idle workers (lowest id first) in (chain, slice) order. In grouped mode the worker that
/// runs a chain's last task stays busy for sync_overhead more.
ScheduleReport simulate(const TaskDag& dag, const CostModel& cost, std::size_t workers);

/// Throws InvariantError unless the trace respects dependencies, never overlaps on a worker,
/// and satisfies makespan >= max(critical path, work / workers).
void check_schedule(const TaskDag& dag, const CostModel& cost, std::size_t workers, const ScheduleReport& r);

struct StrategyRow {
    std::string name;
    std::size_t tasks = 0;
    std::size_t chains = 0;
    double work = 0.0;
    double makespan = 0.0;
    double speedup = 0.0;
};

struct NamedDag {
    std::string name;
    TaskDag dag;
};

std::vector<StrategyRow> compare_strategies(std::span<const NamedDag> dags, const CostModel& cost,
                                            std::size_t workers);

/// `strategy,tasks,chains,work,makespan,speedup`
std::string strategies_csv(std::span<const StrategyRow> rows);
/// `task,chain,slice,worker,start,end`
std::string trace_csv(const TaskDag& dag, const ScheduleReport& r);

} // namespace iscs
