#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <map>
#include <utility>

#include "ubopf/network.hpp"

namespace ubopf {

using ComplexVector = Eigen::VectorXcd;

/// Two-port admittance blocks of one pi-model branch:
///   [I_ij; I_ji] = [y_ii y_ij; y_ji y_jj] [V_i; V_j]
struct BranchAdmittance {
    Matrix3c y_ii, y_ij, y_ji, y_jj;
};

/// Sparse 3n x 3n complex nodal admittance matrix, stored as 3x3 blocks
/// keyed by (node index, node index). Row layout is node-major,
/// phase-minor: row(i, phi) = 3*i + phi.
class GlobalAdmittance {
  public:
    GlobalAdmittance() = default;
    explicit GlobalAdmittance(int node_count) : n_(node_count) {}

    int node_count() const { return n_; }
    int dimension() const { return 3 * n_; }

    void add_block(int i, int j, const Matrix3c& block);

    /// 3x3 block (i, j); zero matrix if the pair has no entry.
    Matrix3c block(int i, int j) const;

    bool has_block(int i, int j) const { return blocks_.count({i, j}) > 0; }

    const std::map<std::pair<int, int>, Matrix3c>& blocks() const { return blocks_; }

    /// I = Y * V for a stacked 3n voltage vector.
    ComplexVector multiply(const ComplexVector& v) const;

    Eigen::SparseMatrix<Complex> to_sparse() const;

    /// max |Y - Y^T| over all entries.
    double asymmetry() const;

  private:
    int n_ = 0;
    std::map<std::pair<int, int>, Matrix3c> blocks_;
};

/// Branch admittance blocks from the series impedance and shunt
/// admittance of a line. Throws NumericalError when z_series is singular
/// (condition number above 1e12).
BranchAdmittance build_branch_admittance(const Line& line);

/// Assembles the global nodal admittance matrix of a validated network
/// (quantities in pu).
GlobalAdmittance assemble_global_admittance(const Network& network);

/// Phase component of the sending-end current of a branch:
/// (y_ii v_i + y_ij v_j) at `phase`.
Complex branch_current(const BranchAdmittance& branch, const Vector3c& v_i, const Vector3c& v_j,
                       Phase phase);

/// Complex power V * conj(I); real part is the active flow, imaginary
/// part the reactive flow.
inline Complex line_power_flow(Complex v_i_phase, Complex i_ij_phase) {
    return v_i_phase * std::conj(i_ij_phase);
}

}  // namespace ubopf
