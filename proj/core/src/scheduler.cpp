#include "iscs/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iscs/ablation.hpp"
#include "iscs/error.hpp"

namespace iscs {
namespace {

constexpr double kRelTolerance = 1e-9;

void push_chain(TaskDag& dag, const std::vector<std::size_t>& channels, const CostModel& cost) {
    std::vector<std::size_t> ids;
    const std::size_t g = dag.chains.size();
    for (std::size_t s = 0; s < channels.size(); ++s) {
        SliceTask t{dag.tasks.size(), g, s, channels[s], cost.slice_cost(channels[s])};
        if (!(t.cost > 0.0)) throw InputError("cost model gives a slice a non-positive cost");
        ids.push_back(t.id);
        dag.tasks.push_back(t);
    }
    dag.chains.push_back(std::move(ids));
}

double join_cost(const TaskDag& dag, const CostModel& cost) {
    return dag.mode == DagMode::Grouped ? cost.sync_overhead : 0.0;
}

bool is_chain_tail(const TaskDag& dag, const SliceTask& t) { return dag.chains[t.group].back() == t.id; }

} // namespace

void CostModel::validate() const {
    for (double v : {base_per_slice, per_channel, sync_overhead})
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("cost model entries must be finite and >= 0");
    if (base_per_slice == 0.0 && per_channel == 0.0) throw InputError("cost model gives every slice zero cost");
}

CostModel parse_cost_model(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            throw InputError("cost triple '" + text + "' is not numeric");
        }
        if (used != item.size()) throw InputError("cost triple '" + text + "' is not numeric");
        v.push_back(x);
    }
    if (v.size() != 3) throw InputError("cost must be three comma-separated numbers: base,per_channel,sync");
    CostModel c{v[0], v[1], v[2]};
    c.validate();
    return c;
}

std::size_t TaskDag::edge_count() const noexcept {
    std::size_t n = 0;
    for (const auto& c : chains) n += c.empty() ? 0 : c.size() - 1;
    return n;
}

std::vector<std::pair<std::size_t, std::size_t>> TaskDag::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (const auto& c : chains)
        for (std::size_t i = 1; i < c.size(); ++i) e.emplace_back(c[i - 1], c[i]);
    return e;
}

double TaskDag::total_work() const noexcept {
    double w = 0.0;
    for (const auto& t : tasks) w += t.cost;
    return w;
}

TaskDag build_flat_dag(std::size_t slices, std::size_t channels, const CostModel& cost) {
    if (slices < 1) throw InputError("flat baseline needs at least one slice");
    cost.validate();
    std::vector<std::size_t> widths(slices, channels / slices);
    for (std::size_t i = 0; i < channels % slices; ++i) ++widths[i];
    TaskDag dag;
    dag.mode = DagMode::Flat;
    push_chain(dag, widths, cost);
    return dag;
}

std::size_t grouped_task_count(const GroupingPlan& plan) {
    std::size_t n = 0;
    for (const auto& g : plan.groups) n += g.size();
    const std::size_t extra = plan.bias_channels.size() + plan.residual.size();
    if (extra == 0) return n;
    const std::size_t width = plan.groups.empty() ? extra : plan.groups.front().front().size();
    return n + (extra + width - 1) / width;
}

TaskDag build_grouped_dag(const GroupingPlan& plan, const CostModel& cost) {
    cost.validate();
    TaskDag dag;
    dag.mode = DagMode::Grouped;
    for (const auto& group : plan.groups) {
        std::vector<std::size_t> widths;
        for (const auto& s : group) widths.push_back(s.size());
        push_chain(dag, widths, cost);
    }
    const std::size_t extra = plan.bias_channels.size() + plan.residual.size();
    if (extra > 0) {
        const std::size_t width = plan.groups.empty() ? extra : plan.groups.front().front().size();
        std::vector<std::size_t> widths;
        for (std::size_t left = extra; left > 0; left -= std::min(left, width)) widths.push_back(std::min(left, width));
        push_chain(dag, widths, cost);
    }
    return dag;
}

TaskDag build_chain_dag(const std::vector<std::vector<double>>& chain_costs, DagMode mode) {
    TaskDag dag;
    dag.mode = mode;
    for (const auto& costs : chain_costs) {
        std::vector<std::size_t> ids;
        for (std::size_t s = 0; s < costs.size(); ++s) {
            if (!(costs[s] > 0.0)) throw InputError("task costs must be positive");
            ids.push_back(dag.tasks.size());
            dag.tasks.push_back({dag.tasks.size(), dag.chains.size(), s, 0, costs[s]});
        }
        dag.chains.push_back(std::move(ids));
    }
    return dag;
}

ScheduleReport simulate(const TaskDag& dag, const CostModel& cost, std::size_t workers) {
    if (workers < 1) throw InputError("need at least one worker");
    const double join = join_cost(dag, cost);
    ScheduleReport r;
    r.total_work = dag.total_work();
    r.trace.resize(dag.tasks.size());
    for (const auto& chain : dag.chains) {
        double path = 0.0;
        for (auto id : chain) path += dag.tasks[id].cost;
        r.chain_critical_path.push_back(chain.empty() ? 0.0 : path + join);
    }

    std::vector<std::size_t> next(dag.chains.size(), 0);
    std::vector<double> chain_ready(dag.chains.size(), 0.0);
    std::vector<double> free_at(workers, 0.0);
    std::size_t remaining = dag.tasks.size();
    double now = 0.0;
    while (remaining > 0) {
        std::size_t w = 0;
        for (std::size_t g = 0; g < dag.chains.size(); ++g) {
            if (next[g] >= dag.chains[g].size() || chain_ready[g] > now) continue;
            while (w < workers && free_at[w] > now) ++w;
            if (w == workers) break;
            const auto& task = dag.tasks[dag.chains[g][next[g]]];
            const double end = now + task.cost;
            const double busy_until = end + (is_chain_tail(dag, task) ? join : 0.0);
            r.trace[task.id] = {task.id, w, now, busy_until};
            free_at[w] = busy_until;
            chain_ready[g] = end;
            ++next[g];
            --remaining;
            ++w;
        }
        double t = std::numeric_limits<double>::infinity();
        for (double f : free_at)
            if (f > now) t = std::min(t, f);
        for (std::size_t g = 0; g < dag.chains.size(); ++g)
            if (next[g] < dag.chains[g].size() && chain_ready[g] > now) t = std::min(t, chain_ready[g]);
        if (remaining > 0 && !std::isfinite(t)) throw InvariantError("scheduler stalled with tasks remaining");
        now = t;
    }
    for (const auto& e : r.trace) r.makespan = std::max(r.makespan, e.end);
    r.speedup_vs_flat_serial = r.makespan > 0.0 ? r.total_work / r.makespan : 0.0;
    return r;
}

void check_schedule(const TaskDag& dag, const CostModel& cost, std::size_t workers, const ScheduleReport& r) {
    const double join = join_cost(dag, cost);
    const double tol = kRelTolerance * std::max(1.0, r.makespan);
    for (const auto& chain : dag.chains)
        for (std::size_t i = 1; i < chain.size(); ++i) {
            const auto& prev = r.trace[chain[i - 1]];
            const double prev_done = prev.start + dag.tasks[chain[i - 1]].cost;
            if (r.trace[chain[i]].start + tol < prev_done) throw InvariantError("task started before its predecessor");
        }
    std::vector<std::vector<TraceEntry>> per_worker(workers);
    for (const auto& e : r.trace) {
        if (e.worker >= workers) throw InvariantError("trace names a worker that does not exist");
        per_worker[e.worker].push_back(e);
    }
    for (auto& list : per_worker) {
        std::sort(list.begin(), list.end(), [](const TraceEntry& a, const TraceEntry& b) { return a.start < b.start; });
        for (std::size_t i = 1; i < list.size(); ++i)
            if (list[i].start + tol < list[i - 1].end) throw InvariantError("overlapping tasks on one worker");
    }
    double joins = 0.0;
    for (const auto& c : dag.chains)
        if (!c.empty()) joins += join;
    double critical = 0.0;
    for (double c : r.chain_critical_path) critical = std::max(critical, c);
    const double bound = std::max(critical, (r.total_work + joins) / static_cast<double>(workers));
    if (r.makespan + tol < bound) throw InvariantError("makespan below its lower bound");
}

std::vector<StrategyRow> compare_strategies(std::span<const NamedDag> dags, const CostModel& cost,
                                            std::size_t workers) {
    std::vector<StrategyRow> rows;
    for (const auto& d : dags) {
        const auto r = simulate(d.dag, cost, workers);
        check_schedule(d.dag, cost, workers, r);
        rows.push_back({d.name, d.dag.tasks.size(), d.dag.chains.size(), r.total_work, r.makespan,
                        r.speedup_vs_flat_serial});
    }
    return rows;
}

std::string strategies_csv(std::span<const StrategyRow> rows) {
    std::string out = "strategy,tasks,chains,work,makespan,speedup\n";
    for (const auto& r : rows)
        out += r.name + "," + std::to_string(r.tasks) + "," + std::to_string(r.chains) + "," + format_number(r.work) +
               "," + format_number(r.makespan) + "," + format_number(r.speedup) + "\n";
    return out;
}

std::string trace_csv(const TaskDag& dag, const ScheduleReport& r) {
    std::string out = "task,chain,slice,worker,start,end\n";
    for (const auto& e : r.trace) {
        const auto& t = dag.tasks[e.task];
        out += std::to_string(e.task) + "," + std::to_string(t.group) + "," + std::to_string(t.slice) + "," +
               std::to_string(e.worker) + "," + format_number(e.start) + "," + format_number(e.end) + "\n";
    }
    return out;
}

} // namespace iscs
