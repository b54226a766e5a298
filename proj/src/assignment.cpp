#include "radioslam/assignment.hpp"

#include "radioslam/errors.hpp"

#include <algorithm>
#include <queue>
#include <utility>

namespace radioslam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest augmenting path solver for rows <= cols. Returns false when
// infeasible.
bool solve_wide(const CostMatrix& c, std::vector<int>& col4row) {
    const int nr = static_cast<int>(c.rows());
    const int nc = static_cast<int>(c.cols());
    std::vector<double> u(nr, 0.0), v(nc, 0.0), shortest(nc);
    std::vector<int> path(nc), row4col(nc, -1), remaining(nc);
    std::vector<char> sr(nr), sc(nc);
    col4row.assign(nr, -1);

    for (int cur = 0; cur < nr; ++cur) {
        std::fill(shortest.begin(), shortest.end(), kInf);
        std::fill(path.begin(), path.end(), -1);
        std::fill(sr.begin(), sr.end(), 0);
        std::fill(sc.begin(), sc.end(), 0);
        for (int j = 0; j < nc; ++j) remaining[j] = nc - j - 1;
        int num_remaining = nc;

        double min_val = 0.0;
        int i = cur;
        int sink = -1;
        while (sink == -1) {
            sr[i] = 1;
            int index = -1;
            double lowest = kInf;
            for (int it = 0; it < num_remaining; ++it) {
                const int j = remaining[it];
                const double cij = c(i, j);
                if (cij < kInf) {
                    const double r = min_val + cij - u[i] - v[j];
                    if (r < shortest[j]) {
                        path[j] = i;
                        shortest[j] = r;
                    }
                }
                if (shortest[j] < lowest || (shortest[j] == lowest && shortest[j] < kInf && row4col[j] == -1)) {
                    lowest = shortest[j];
                    index = it;
                }
            }
            min_val = lowest;
            if (!(min_val < kInf)) return false;
            const int j = remaining[index];
            if (row4col[j] == -1) sink = j; else i = row4col[j];
            sc[j] = 1;
            remaining[index] = remaining[--num_remaining];
        }

        u[cur] += min_val;
        for (int r = 0; r < nr; ++r) {
            if (sr[r] && r != cur) u[r] += min_val - shortest[col4row[r]];
        }
        for (int j = 0; j < nc; ++j) {
            if (sc[j]) v[j] -= min_val - shortest[j];
        }

        int j = sink;
        while (true) {
            const int r = path[j];
            row4col[j] = r;
            std::swap(col4row[r], j);
            if (r == cur) break;
        }
    }
    return true;
}

bool solve_any(const CostMatrix& c, std::vector<int>& row_to_col) {
    if (c.rows() <= c.cols()) return solve_wide(c, row_to_col);
    std::vector<int> col_to_row;
    if (!solve_wide(c.transpose(), col_to_row)) return false;
    row_to_col.assign(static_cast<std::size_t>(c.rows()), -1);
    for (std::size_t j = 0; j < col_to_row.size(); ++j) row_to_col[col_to_row[j]] = static_cast<int>(j);
    return true;
}

struct Node {
    Assignment solution;
    std::vector<std::pair<int, int>> forced;
    std::vector<std::pair<int, int>> forbidden;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.solution.cost != b.solution.cost) return a.solution.cost > b.solution.cost;
        return a.solution.row_to_col > b.solution.row_to_col;
    }
};

bool solve_constrained(const CostMatrix& c, Node& node) {
    CostMatrix m = c;
    for (auto [r, col] : node.forbidden) m(r, col) = kInf;
    for (auto [r, col] : node.forced) {
        const double keep = m(r, col);
        m.row(r).setConstant(kInf);
        m.col(col).setConstant(kInf);
        m(r, col) = keep;
    }
    std::vector<int> sol;
    if (!solve_any(m, sol)) return false;
    const double cost = assignment_cost(c, sol);
    if (!(cost < kInf)) return false;
    node.solution = {std::move(sol), cost};
    return true;
}

}  // namespace

double assignment_cost(const CostMatrix& c, const std::vector<int>& row_to_col) {
    double sum = 0.0;
    for (std::size_t r = 0; r < row_to_col.size(); ++r) {
        if (row_to_col[r] >= 0) sum += c(static_cast<Eigen::Index>(r), row_to_col[r]);
    }
    return sum;
}

Assignment solve_lap(const CostMatrix& c) {
    std::vector<int> sol;
    if (!solve_any(c, sol)) throw Infeasible("no finite-cost assignment exists");
    const double cost = assignment_cost(c, sol);
    if (!(cost < kInf)) throw Infeasible("no finite-cost assignment exists");
    return {std::move(sol), cost};
}

std::vector<Assignment> kbest(const CostMatrix& c, int k) {
    if (k < 1) throw std::invalid_argument("kbest needs k >= 1");
    Node root;
    root.solution = solve_lap(c);

    std::priority_queue<Node, std::vector<Node>, NodeOrder> queue;
    queue.push(std::move(root));
    std::vector<Assignment> out;
    while (!queue.empty() && static_cast<int>(out.size()) < k) {
        Node node = queue.top();
        queue.pop();
        out.push_back(node.solution);

        // Partition the remaining solution space of this node: child t
        // forbids the t-th free pair and forces every earlier free pair.
        std::vector<std::pair<int, int>> pairs;
        const auto& sol = node.solution.row_to_col;
        for (std::size_t r = 0; r < sol.size(); ++r) {
            if (sol[r] < 0) continue;
            const std::pair<int, int> p{static_cast<int>(r), sol[r]};
            if (std::find(node.forced.begin(), node.forced.end(), p) == node.forced.end()) pairs.push_back(p);
        }
        std::vector<std::pair<int, int>> forced = node.forced;
        for (const auto& p : pairs) {
            Node child;
            child.forced = forced;
            child.forbidden = node.forbidden;
            child.forbidden.push_back(p);
            if (solve_constrained(c, child)) queue.push(std::move(child));
            forced.push_back(p);
        }
    }
    return out;
}

}  // namespace radioslam
