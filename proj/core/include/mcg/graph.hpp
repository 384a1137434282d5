#pragma once

#include <Eigen/Dense>

#include <string>
#include <tuple>
#include <vector>

namespace mcg {

// Undirected weighted graph stored as a dense symmetric weight matrix with
// zero diagonal and nonnegative weights.
class WeightedGraph {
public:
    explicit WeightedGraph(int node_count);
    WeightedGraph(int node_count, Eigen::MatrixXd weights);

    static WeightedGraph complete(int node_count, double weight = 1.0);
    static WeightedGraph ring(int node_count, double weight = 1.0);
    static WeightedGraph star(int node_count, double weight = 1.0);
    // Edges given as (u, v, weight) with 1-based endpoints.
    static WeightedGraph from_edges(int node_count,
                                    const std::vector<std::tuple<int, int, double>>& edges);

    int node_count() const { return static_cast<int>(weights_.rows()); }
    const Eigen::MatrixXd& weights() const { return weights_; }
    double weight(int u, int v) const { return weights_(u, v); }

    // Exact connectivity check by union-find over positive-weight edges.
    bool connected() const;

private:
    Eigen::MatrixXd weights_;
};

// Communication topology: one graph per cluster plus the graph connecting the
// leader agents (first agent of each cluster).
struct ClusterTopology {
    std::vector<WeightedGraph> inner;
    WeightedGraph leader{1};
};

struct TopologyVerdict {
    bool ok = false;
    std::string detail;
};

// Laplacians derived from a topology. `block_diag` stacks the per-cluster
// Laplacians; `expanded_leader` embeds the leader Laplacian at the leader
// coordinates of the n-agent index space; `combined` is their sum, whose null
// space is exactly the all-agents consensus direction when the topology is
// connected.
struct LaplacianSet {
    std::vector<Eigen::MatrixXd> per_cluster;
    Eigen::MatrixXd block_diag;
    Eigen::MatrixXd leader;
    Eigen::MatrixXd expanded_leader;
    Eigen::MatrixXd combined;
};

Eigen::MatrixXd laplacian(const WeightedGraph& g);

// Embeds an m x m leader Laplacian into the n x n agent index space: entry
// (j,l) lands at (first agent of cluster j, first agent of cluster l), all
// other entries are zero.
Eigen::MatrixXd expand_leader_laplacian(const Eigen::MatrixXd& leader_laplacian,
                                        const std::vector<int>& cluster_sizes);

// Smallest strictly positive eigenvalue of a symmetric PSD matrix; eigenvalues
// below 1e-9 * ||L|| count as zero. Returns 0 when no positive eigenvalue
// exists. Throws std::invalid_argument on non-symmetric input.
double algebraic_connectivity(const Eigen::MatrixXd& L);

// Largest eigenvalue of a symmetric matrix.
double spectral_max(const Eigen::MatrixXd& L);

// Literal second-smallest eigenvalue; 0 for matrices smaller than 2x2.
double second_smallest_eigenvalue(const Eigen::MatrixXd& L);

TopologyVerdict validate_topology(const ClusterTopology& t);

LaplacianSet build_laplacians(const ClusterTopology& t);

}  // namespace mcg
