#include "mcg/graph.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mcg {

namespace {

void check_weights(const Eigen::MatrixXd& w) {
    if (w.rows() != w.cols()) throw std::invalid_argument("graph weights must be square");
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        if (w(i, i) != 0.0) throw std::invalid_argument("graph weights must have zero diagonal");
        for (Eigen::Index k = 0; k < w.cols(); ++k) {
            if (w(i, k) < 0.0) throw std::invalid_argument("graph weights must be nonnegative");
            if (w(i, k) != w(k, i)) throw std::invalid_argument("graph weights must be symmetric");
        }
    }
}

void require_symmetric(const Eigen::MatrixXd& L) {
    if (L.rows() != L.cols()) throw std::invalid_argument("matrix must be square");
    const double scale = 1.0 + L.cwiseAbs().maxCoeff();
    if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("matrix must be symmetric");
}

int find_root(std::vector<int>& parent, int v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

}  // namespace

WeightedGraph::WeightedGraph(int node_count) {
    if (node_count <= 0) throw std::invalid_argument("graph needs at least one node");
    weights_ = Eigen::MatrixXd::Zero(node_count, node_count);
}

WeightedGraph::WeightedGraph(int node_count, Eigen::MatrixXd weights) : weights_(std::move(weights)) {
    if (weights_.rows() != node_count) throw std::invalid_argument("weight matrix size mismatch");
    check_weights(weights_);
}

WeightedGraph WeightedGraph::complete(int node_count, double weight) {
    WeightedGraph g(node_count);
    g.weights_.setConstant(weight);
    g.weights_.diagonal().setZero();
    check_weights(g.weights_);
    return g;
}

WeightedGraph WeightedGraph::ring(int node_count, double weight) {
    WeightedGraph g(node_count);
    if (node_count == 2) {
        g.weights_(0, 1) = g.weights_(1, 0) = weight;
        return g;
    }
    for (int v = 0; v < node_count; ++v) {
        int u = (v + 1) % node_count;
        if (u == v) continue;
        g.weights_(v, u) = g.weights_(u, v) = weight;
    }
    return g;
}

WeightedGraph WeightedGraph::star(int node_count, double weight) {
    WeightedGraph g(node_count);
    for (int v = 1; v < node_count; ++v) g.weights_(0, v) = g.weights_(v, 0) = weight;
    return g;
}

WeightedGraph WeightedGraph::from_edges(int node_count,
                                        const std::vector<std::tuple<int, int, double>>& edges) {
    WeightedGraph g(node_count);
    for (const auto& [u, v, w] : edges) {
        if (u < 1 || u > node_count || v < 1 || v > node_count)
            throw std::invalid_argument("edge endpoint out of range (endpoints are 1-based)");
        if (u == v) throw std::invalid_argument("self-loops are not allowed");
        if (w <= 0.0) throw std::invalid_argument("edge weights must be positive");
        g.weights_(u - 1, v - 1) = w;
        g.weights_(v - 1, u - 1) = w;
    }
    return g;
}

bool WeightedGraph::connected() const {
    const int n = node_count();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
            if (weights_(i, k) > 0.0) parent[find_root(parent, i)] = find_root(parent, k);
    const int root = find_root(parent, 0);
    for (int v = 1; v < n; ++v)
        if (find_root(parent, v) != root) return false;
    return true;
}

Eigen::MatrixXd laplacian(const WeightedGraph& g) {
    Eigen::MatrixXd L = -g.weights();
    L.diagonal() = g.weights().rowwise().sum();
    return L;
}

Eigen::MatrixXd expand_leader_laplacian(const Eigen::MatrixXd& leader_laplacian,
                                        const std::vector<int>& cluster_sizes) {
    const int m = static_cast<int>(cluster_sizes.size());
    if (leader_laplacian.rows() != m || leader_laplacian.cols() != m)
        throw std::invalid_argument("leader Laplacian size must match the cluster count");
    int n = 0;
    std::vector<int> first(m);
    for (int j = 0; j < m; ++j) {
        if (cluster_sizes[j] <= 0) throw std::invalid_argument("cluster sizes must be positive");
        first[j] = n;
        n += cluster_sizes[j];
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) out(first[j], first[l]) = leader_laplacian(j, l);
    return out;
}

double algebraic_connectivity(const Eigen::MatrixXd& L) {
    require_symmetric(L);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L, Eigen::EigenvaluesOnly);
    const auto& vals = eig.eigenvalues();
    const double cutoff = 1e-9 * std::max(vals.cwiseAbs().maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < vals.size(); ++i)
        if (vals(i) > cutoff) return vals(i);
    return 0.0;
}

double spectral_max(const Eigen::MatrixXd& L) {
    require_symmetric(L);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

double second_smallest_eigenvalue(const Eigen::MatrixXd& L) {
    require_symmetric(L);
    if (L.rows() < 2) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(1);
}

TopologyVerdict validate_topology(const ClusterTopology& t) {
    for (std::size_t j = 0; j < t.inner.size(); ++j) {
        if (!t.inner[j].connected())
            return {false, "inner graph of cluster " + std::to_string(j + 1) + " is disconnected"};
    }
    if (static_cast<int>(t.inner.size()) != t.leader.node_count())
        return {false, "leader graph size does not match the cluster count"};
    if (!t.leader.connected()) return {false, "leader graph is disconnected"};
    return {true, ""};
}

LaplacianSet build_laplacians(const ClusterTopology& t) {
    LaplacianSet set;
    std::vector<int> sizes;
    int n = 0;
    for (const auto& g : t.inner) {
        set.per_cluster.push_back(laplacian(g));
        sizes.push_back(g.node_count());
        n += g.node_count();
    }
    set.block_diag = Eigen::MatrixXd::Zero(n, n);
    int off = 0;
    for (const auto& L : set.per_cluster) {
        set.block_diag.block(off, off, L.rows(), L.cols()) = L;
        off += static_cast<int>(L.rows());
    }
    set.leader = laplacian(t.leader);
    set.expanded_leader = expand_leader_laplacian(set.leader, sizes);
    set.combined = set.block_diag + set.expanded_leader;
    return set;
}

}  // namespace mcg
