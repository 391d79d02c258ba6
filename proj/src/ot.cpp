#include "sigabc/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sigabc/error.hpp"

namespace sigabc {

using detail::require;

namespace {

struct Arc {
    std::size_t row;
    std::size_t col;
    std::int64_t flow;
};

class TransportSimplex {
public:
    TransportSimplex(std::span<const std::int64_t> supply, std::span<const std::int64_t> demand,
                     std::span<const double> cost)
        : n_(supply.size()), m_(demand.size()), cost_(cost), basic_(n_ * m_, -1),
          adj_(n_ + m_), pot_(n_ + m_), parent_(n_ + m_), parent_arc_(n_ + m_), depth_(n_ + m_) {
        double cmax = 0.0;
        for (double c : cost_) cmax = std::max(cmax, std::abs(c));
        eps_ = 1e-12 * (cmax + 1.0);
        north_west_corner(supply, demand);
    }

    TransportSolution run() {
        const std::size_t cells = n_ * m_;
        const std::size_t block = std::max<std::size_t>(
            10, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cells)))));
        const std::size_t degenerate_limit = 50 * (n_ + m_) + 100;
        const std::size_t pivot_cap = 200 * cells + 10000;
        std::size_t next = 0, degenerate_run = 0, pivots = 0;
        bool bland = false;

        while (true) {
            build_tree();
            std::size_t entering = cells;
            if (bland) {
                for (std::size_t e = 0; e < cells; ++e)
                    if (basic_[e] < 0 && reduced_cost(e) < -eps_) {
                        entering = e;
                        break;
                    }
            } else {
                double best = -eps_;
                std::size_t seen = 0, in_block = 0;
                std::size_t e = next;
                while (seen < cells) {
                    if (basic_[e] < 0) {
                        const double r = reduced_cost(e);
                        if (r < best) {
                            best = r;
                            entering = e;
                        }
                    }
                    ++seen;
                    e = (e + 1 == cells) ? 0 : e + 1;
                    if (++in_block == block) {
                        if (entering != cells) break;
                        in_block = 0;
                    }
                }
                next = e;
            }
            if (entering == cells) break;
            if (++pivots > pivot_cap) throw NumericalError("transport simplex failed to converge");
            const bool degenerate = pivot(entering, bland);
            degenerate_run = degenerate ? degenerate_run + 1 : 0;
            if (degenerate_run > degenerate_limit) bland = true;
        }

        TransportSolution sol;
        sol.pivots = pivots;
        for (const auto& a : arcs_) {
            sol.plan.push_back({a.row, a.col, a.flow});
        }
        std::sort(sol.plan.begin(), sol.plan.end(), [](const TransportEntry& a, const TransportEntry& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (const auto& p : sol.plan) sol.cost += cost_[p.row * m_ + p.col] * static_cast<double>(p.mass);
        return sol;
    }

private:
    std::size_t col_node(std::size_t j) const { return n_ + j; }

    double reduced_cost(std::size_t e) const {
        return cost_[e] - pot_[e / m_] - pot_[col_node(e % m_)];
    }

    void add_arc(std::size_t i, std::size_t j, std::int64_t flow) {
        const int id = static_cast<int>(arcs_.size());
        arcs_.push_back({i, j, flow});
        basic_[i * m_ + j] = id;
        adj_[i].push_back(id);
        adj_[col_node(j)].push_back(id);
    }

    void remove_arc(int id) {
        auto drop = [&](std::vector<int>& v, int x) {
            auto it = std::find(v.begin(), v.end(), x);
            *it = v.back();
            v.pop_back();
        };
        const Arc gone = arcs_[static_cast<std::size_t>(id)];
        drop(adj_[gone.row], id);
        drop(adj_[col_node(gone.col)], id);
        basic_[gone.row * m_ + gone.col] = -1;
        const int last = static_cast<int>(arcs_.size()) - 1;
        if (id != last) {
            const Arc moved = arcs_[static_cast<std::size_t>(last)];
            arcs_[static_cast<std::size_t>(id)] = moved;
            basic_[moved.row * m_ + moved.col] = id;
            std::replace(adj_[moved.row].begin(), adj_[moved.row].end(), last, id);
            std::replace(adj_[col_node(moved.col)].begin(), adj_[col_node(moved.col)].end(), last, id);
        }
        arcs_.pop_back();
    }

    void north_west_corner(std::span<const std::int64_t> supply, std::span<const std::int64_t> demand) {
        std::size_t i = 0, j = 0;
        std::int64_t s = supply[0], d = demand[0];
        while (true) {
            const std::int64_t q = std::min(s, d);
            add_arc(i, j, q);
            s -= q;
            d -= q;
            if (i + 1 == n_ && j + 1 == m_) break;
            if ((s == 0 && i + 1 < n_) || j + 1 == m_) {
                s = supply[++i];
            } else {
                d = demand[++j];
            }
        }
    }

    // Potentials with pot[row 0] = 0 plus parent links for cycle finding.
    void build_tree() {
        const std::size_t nodes = n_ + m_;
        std::fill(parent_.begin(), parent_.end(), nodes);
        queue_.clear();
        queue_.push_back(0);
        pot_[0] = 0.0;
        depth_[0] = 0;
        parent_[0] = 0;
        parent_arc_[0] = -1;
        for (std::size_t h = 0; h < queue_.size(); ++h) {
            const std::size_t u = queue_[h];
            for (int id : adj_[u]) {
                const Arc& a = arcs_[static_cast<std::size_t>(id)];
                const std::size_t v = (u < n_) ? col_node(a.col) : a.row;
                if (v == parent_[u] && id == parent_arc_[u]) continue;
                parent_[v] = u;
                parent_arc_[v] = id;
                depth_[v] = depth_[u] + 1;
                pot_[v] = cost_[a.row * m_ + a.col] - pot_[u];
                queue_.push_back(v);
            }
        }
        if (queue_.size() != nodes) throw NumericalError("transport basis is not a spanning tree");
    }

    // Returns true when the pivot moved zero mass.
    bool pivot(std::size_t entering, bool bland) {
        const std::size_t ei = entering / m_, ej = entering % m_;
        // Path from column node ej to row node ei through the tree.
        std::vector<int> up_from_col, up_from_row;
        std::size_t a = col_node(ej), b = ei;
        while (depth_[a] > depth_[b]) {
            up_from_col.push_back(parent_arc_[a]);
            a = parent_[a];
        }
        while (depth_[b] > depth_[a]) {
            up_from_row.push_back(parent_arc_[b]);
            b = parent_[b];
        }
        while (a != b) {
            up_from_col.push_back(parent_arc_[a]);
            a = parent_[a];
            up_from_row.push_back(parent_arc_[b]);
            b = parent_[b];
        }
        std::vector<int> path = std::move(up_from_col);
        path.insert(path.end(), up_from_row.rbegin(), up_from_row.rend());

        // Arcs at even positions from ej lose mass, odd positions gain.
        std::int64_t theta = std::numeric_limits<std::int64_t>::max();
        int leaving = -1;
        std::size_t leaving_cell = 0;
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const Arc& arc = arcs_[static_cast<std::size_t>(path[k])];
            const std::size_t cell = arc.row * m_ + arc.col;
            const bool better = arc.flow < theta || (bland && arc.flow == theta && cell < leaving_cell);
            if (better) {
                theta = arc.flow;
                leaving = path[k];
                leaving_cell = cell;
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k) {
            Arc& arc = arcs_[static_cast<std::size_t>(path[k])];
            arc.flow += (k % 2 == 0) ? -theta : theta;
        }
        remove_arc(leaving);
        add_arc(ei, ej, theta);
        return theta == 0;
    }

    std::size_t n_, m_;
    std::span<const double> cost_;
    double eps_ = 0.0;
    std::vector<Arc> arcs_;
    std::vector<int> basic_;
    std::vector<std::vector<int>> adj_;
    std::vector<double> pot_;
    std::vector<std::size_t> parent_;
    std::vector<int> parent_arc_;
    std::vector<std::size_t> depth_;
    std::vector<std::size_t> queue_;
};

}  // namespace

TransportSolution solve_transport(std::span<const std::int64_t> supply,
                                  std::span<const std::int64_t> demand,
                                  std::span<const double> cost) {
    require(!supply.empty() && !demand.empty(), "transport problem needs non-empty supply and demand");
    require(cost.size() == supply.size() * demand.size(), "transport cost matrix has the wrong size");
    for (auto s : supply) require(s >= 0, "negative supply");
    for (auto d : demand) require(d >= 0, "negative demand");
    const auto ts = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
    const auto td = std::accumulate(demand.begin(), demand.end(), std::int64_t{0});
    require(ts == td, "transport problem is unbalanced");
    for (double c : cost) require(std::isfinite(c), "non-finite transport cost");
    TransportSimplex simplex(supply, demand, cost);
    return simplex.run();
}

}  // namespace sigabc
