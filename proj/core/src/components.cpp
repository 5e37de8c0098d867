#include "skel/components.hpp"

#include <algorithm>
#include <numeric>

#include "skel/csv.hpp"
#include "skel/error.hpp"

namespace skel {

std::size_t Components::lcm_period() const {
  std::size_t l = 1;
  for (const auto& c : classes) l = std::lcm(l, c.period);
  return l;
}

std::size_t Components::cyclic_count() const {
  std::size_t n = 0;
  for (const auto& c : classes) n += c.period;
  return n;
}

double default_support_threshold(const UlamOperator& op) {
  return 1e-3 / static_cast<double>(op.grid.cell_count());
}

Components mixing_components(const UlamOperator& op, const DensityField& h,
                             double support_threshold) {
  const std::size_t n = op.grid.cell_count();
  if (h.values.size() != n) throw Error(ErrorKind::domain, "density does not match the operator");
  const std::vector<double> mass = masses(h);
  std::vector<char> in_support(n, 0);
  std::size_t support = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (mass[i] > support_threshold) {
      in_support[i] = 1;
      ++support;
    }
  if (support == 0)
    throw Error(ErrorKind::degenerate_input, "no cell carries invariant mass above the threshold");

  auto edges = [&](std::size_t u, auto&& visit) {
    const auto cols = op.P.row_cols(u);
    const auto vals = op.P.row_values(u);
    for (std::size_t p = 0; p < cols.size(); ++p)
      if (vals[p] > 0.0 && in_support[cols[p]]) visit(cols[p]);
  };

  // Iterative Tarjan.
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), scc(n, kUnset);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::size_t next_index = 0, scc_count = 0;
  struct Frame {
    std::size_t node;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (std::size_t root = 0; root < n; ++root) {
    if (!in_support[root] || index[root] != kUnset) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const std::size_t u = f.node;
      const auto cols = op.P.row_cols(u);
      const auto vals = op.P.row_values(u);
      bool descended = false;
      while (f.edge < cols.size()) {
        const std::size_t v = cols[f.edge];
        const double w = vals[f.edge];
        ++f.edge;
        if (!(w > 0.0) || !in_support[v]) continue;
        if (index[v] == kUnset) {
          index[v] = low[v] = next_index++;
          stack.push_back(v);
          on_stack[v] = 1;
          call.push_back({v, 0});
          descended = true;
          break;
        }
        if (on_stack[v]) low[u] = std::min(low[u], index[v]);
      }
      if (descended) continue;
      if (low[u] == index[u]) {
        std::size_t v;
        do {
          v = stack.back();
          stack.pop_back();
          on_stack[v] = 0;
          scc[v] = scc_count;
        } while (v != u);
        ++scc_count;
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[u]);
      }
    }
  }

  std::vector<char> closed(scc_count, 1);
  std::vector<std::vector<std::size_t>> members(scc_count);
  for (std::size_t u = 0; u < n; ++u) {
    if (!in_support[u]) continue;
    members[scc[u]].push_back(u);
    edges(u, [&](std::size_t v) {
      if (scc[v] != scc[u]) closed[scc[u]] = 0;
    });
  }

  Components out;
  out.cell_class.assign(n, -1);
  out.cell_phase.assign(n, -1);
  std::vector<long> level(n, -1);
  for (std::size_t s = 0; s < scc_count; ++s) {
    if (!closed[s]) continue;
    const auto& cells = members[s];
    // A single cell without a self-loop is not recurrent.
    bool has_edge = cells.size() > 1;
    if (!has_edge) edges(cells[0], [&](std::size_t v) { has_edge = has_edge || v == cells[0]; });
    if (!has_edge) continue;

    // BFS levels, then period = gcd of level[u] + 1 - level[v] over class edges.
    std::vector<std::size_t> queue{cells[0]};
    level[cells[0]] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::size_t u = queue[qi];
      edges(u, [&](std::size_t v) {
        if (scc[v] == s && level[v] < 0) {
          level[v] = level[u] + 1;
          queue.push_back(v);
        }
      });
    }
    std::size_t period = 0;
    for (std::size_t u : cells)
      edges(u, [&](std::size_t v) {
        if (scc[v] != s) return;
        const long d = level[u] + 1 - level[v];
        period = std::gcd(period, static_cast<std::size_t>(d < 0 ? -d : d));
      });
    if (period == 0) period = 1;

    ComponentClass cls;
    cls.cells = cells;
    cls.period = period;
    const long id = static_cast<long>(out.classes.size());
    for (std::size_t u : cells) {
      cls.mass += mass[u];
      out.cell_class[u] = id;
      out.cell_phase[u] = level[u] % static_cast<long>(period);
    }
    out.classes.push_back(std::move(cls));
  }
  if (out.classes.empty())
    throw Error(ErrorKind::degenerate_input, "support graph has no recurrent class");
  return out;
}

void write_components_csv(const Components& c, const UniformGrid& grid,
                          const std::filesystem::path& path) {
  CsvTable t;
  const std::size_t k = grid.dim();
  for (std::size_t a = 0; a < k; ++a) t.header.push_back("i" + std::to_string(a + 1));
  t.header.push_back("class");
  t.header.push_back("phase");
  std::vector<std::size_t> m(k);
  for (std::size_t i = 0; i < c.cell_class.size(); ++i) {
    grid.multi_index(i, m);
    std::vector<double> row(m.begin(), m.end());
    row.push_back(static_cast<double>(c.cell_class[i]));
    row.push_back(static_cast<double>(c.cell_phase[i]));
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path);
}

nlohmann::json to_json(const Components& c) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& cls : c.classes)
    classes.push_back({{"cells", cls.cells.size()}, {"period", cls.period}, {"mass", cls.mass}});
  return {{"classes", classes}, {"lcm_period", c.lcm_period()}, {"cyclic_count", c.cyclic_count()}};
}

}  // namespace skel
