#include "ubopf/admittance.hpp"

#include <Eigen/SVD>
#include <sstream>

#include "ubopf/errors.hpp"

namespace ubopf {

void GlobalAdmittance::add_block(int i, int j, const Matrix3c& block) {
    auto it = blocks_.find({i, j});
    if (it == blocks_.end())
        blocks_.emplace(std::make_pair(i, j), block);
    else
        it->second += block;
}

Matrix3c GlobalAdmittance::block(int i, int j) const {
    auto it = blocks_.find({i, j});
    return it == blocks_.end() ? Matrix3c::Zero().eval() : it->second;
}

ComplexVector GlobalAdmittance::multiply(const ComplexVector& v) const {
    ComplexVector out = ComplexVector::Zero(dimension());
    for (const auto& [key, blk] : blocks_)
        out.segment<3>(3 * key.first) += blk * v.segment<3>(3 * key.second);
    return out;
}

Eigen::SparseMatrix<Complex> GlobalAdmittance::to_sparse() const {
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(blocks_.size() * 9);
    for (const auto& [key, blk] : blocks_)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                if (blk(r, c) != Complex(0, 0))
                    trips.emplace_back(3 * key.first + r, 3 * key.second + c, blk(r, c));
    Eigen::SparseMatrix<Complex> m(dimension(), dimension());
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

double GlobalAdmittance::asymmetry() const {
    double worst = 0.0;
    for (const auto& [key, blk] : blocks_) {
        Matrix3c other = block(key.second, key.first);
        worst = std::max(worst, (blk - other.transpose()).cwiseAbs().maxCoeff());
    }
    return worst;
}

BranchAdmittance build_branch_admittance(const Line& line) {
    Eigen::JacobiSVD<Matrix3c> svd(line.z_series, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(2);
    if (smax == 0.0 || smin / smax < 1e-12) {
        std::ostringstream os;
        os << "singular series impedance on line " << line.from_node << "->" << line.to_node
           << " (condition " << (smin == 0.0 ? std::string("inf")
                                             : std::to_string(smax / smin))
           << ")";
        throw NumericalError(os.str());
    }
    const Matrix3c z_inv = svd.solve(Matrix3c::Identity());

    BranchAdmittance br;
    br.y_ii = z_inv + 0.5 * line.y_shunt;
    br.y_jj = br.y_ii;
    br.y_ij = -z_inv;
    br.y_ji = -z_inv;
    return br;
}

GlobalAdmittance assemble_global_admittance(const Network& network) {
    const Network net = ensure_per_unit(network);
    GlobalAdmittance y(net.node_count());
    for (const auto& line : net.lines) {
        const int i = net.node_index(line.from_node);
        const int j = net.node_index(line.to_node);
        const BranchAdmittance br = build_branch_admittance(line);
        y.add_block(i, i, br.y_ii);
        y.add_block(j, j, br.y_jj);
        y.add_block(i, j, br.y_ij);
        y.add_block(j, i, br.y_ji);
    }
    return y;
}

Complex branch_current(const BranchAdmittance& branch, const Vector3c& v_i, const Vector3c& v_j,
                       Phase phase) {
    const Vector3c i_ij = branch.y_ii * v_i + branch.y_ij * v_j;
    return i_ij(phase_index(phase));
}

}  // namespace ubopf
