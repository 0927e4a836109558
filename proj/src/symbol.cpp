#include "thyp/symbol.hpp"

#include "thyp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace thyp {

namespace {

std::string describe(const Vec& v) {
    std::ostringstream os;
    os << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ')';
    return os.str();
}

// Orthonormal basis of range(W) that depends only on the subspace: greedy
// pivoted Gram-Schmidt on the columns of the orthogonal projector W W^T.
Mat canonical_basis(const Mat& W) {
    const auto m = W.rows();
    const auto k = W.cols();
    Mat proj = W * W.transpose();
    Mat basis(m, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index c = 0; c < m; ++c) {
            const double nrm = proj.col(c).norm();
            if (nrm > best + 1e-12) {
                best = nrm;
                pivot = c;
            }
        }
        Vec v = proj.col(pivot) / best;
        basis.col(j) = v;
        proj -= v * (v.transpose() * proj);
    }
    return basis;
}

// First entry of largest magnitude made positive.
void fix_sign(Eigen::Ref<Vec> v) {
    const double vmax = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) >= vmax - 1e-12 * std::max(1.0, vmax)) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

bool lex_less(const Vec& a, const Vec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - 1e-12) return true;
        if (a[i] > b[i] + 1e-12) return false;
    }
    return false;
}

}  // namespace

AdmissibleRegion AdmissibleRegion::whole_space() {
    AdmissibleRegion r;
    r.contains = [](const Vec&) { return true; };
    r.margin = [](const Vec&) { return std::numeric_limits<double>::infinity(); };
    return r;
}

int EigenStructure::offset(int k) const {
    int off = 0;
    for (int c = 0; c < k; ++c) off += multiplicity[c];
    return off;
}

const char* to_string(FailureKind kind) {
    switch (kind) {
        case FailureKind::ComplexSpectrum: return "ComplexSpectrum";
        case FailureKind::Defective: return "Defective";
        case FailureKind::OutsideDomain: return "OutsideDomain";
        case FailureKind::Singular: return "SingularTimeMatrix";
    }
    return "unknown";
}

Mat assemble_symbol(const SystemDef& sys, double t, const Vec& x, const Vec& state,
                    const Vec& xi, bool closure) {
    if (!closure && !sys.domain.contains(state)) {
        throw EvaluationOutsideDomain("symbol evaluated at inadmissible state " +
                                      describe(state));
    }
    Mat A = Mat::Zero(sys.m, sys.m);
    for (int i = 0; i < sys.N; ++i) {
        if (xi[i] != 0.0) A += xi[i] * sys.coeff(t, x, state, i);
    }
    return A;
}

EigenStructure eigendecompose(const Mat& A, const ToleranceSet& tols) {
    if (!A.allFinite()) throw NonFinite("eigendecompose: non-finite matrix entries");
    const auto m = A.rows();
    EigenStructure es;
    es.norm = A.norm();
    const double scale = std::max(1.0, es.norm);

    Eigen::EigenSolver<Mat> solver(A, false);
    if (solver.info() != Eigen::Success) throw Defective("eigensolver did not converge");
    const Eigen::VectorXcd ev = solver.eigenvalues();

    std::vector<double> re(static_cast<std::size_t>(m));
    double max_imag = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        re[static_cast<std::size_t>(i)] = ev[i].real();
        max_imag = std::max(max_imag, std::abs(ev[i].imag()));
    }
    es.imag_ratio = es.norm > 0 ? max_imag / es.norm : 0.0;
    if (max_imag > tols.real * es.norm) {
        std::ostringstream os;
        os << "complex spectrum: max |Im lambda| / |A| = " << es.imag_ratio;
        throw ComplexSpectrum(os.str(), es.imag_ratio);
    }
    std::sort(re.begin(), re.end());

    // single-linkage clustering of the sorted real parts
    std::vector<std::vector<double>> groups;
    for (double r : re) {
        if (groups.empty() || r - groups.back().back() > tols.cluster * scale) {
            groups.push_back({r});
        } else {
            groups.back().push_back(r);
        }
    }

    es.S.resize(m, m);
    es.V.resize(m, m);
    es.D = Mat::Zero(m, m);
    Eigen::Index row = 0;
    for (const auto& g : groups) {
        double lam = 0.0;
        for (double r : g) lam += r;
        lam /= static_cast<double>(g.size());
        const auto k = static_cast<Eigen::Index>(g.size());

        Mat B = A - lam * Mat::Identity(m, m);
        Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vec& sv = svd.singularValues();
        Eigen::Index nullity = 0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (sv[j] <= tols.rank * scale) ++nullity;
        }
        if (nullity < k) {
            std::ostringstream os;
            os << "defective eigenvalue " << lam << ": geometric multiplicity " << nullity
               << " < algebraic multiplicity " << k;
            throw Defective(os.str());
        }
        // smallest singular values sit at the end
        Mat W = canonical_basis(svd.matrixU().rightCols(k));
        std::vector<Vec> rows;
        for (Eigen::Index j = 0; j < k; ++j) {
            Vec w = W.col(j);
            fix_sign(w);
            rows.push_back(std::move(w));
        }
        std::stable_sort(rows.begin(), rows.end(), lex_less);
        for (Eigen::Index j = 0; j < k; ++j) {
            es.S.row(row + j) = rows[static_cast<std::size_t>(j)].transpose();
            es.D(row + j, row + j) = lam;
        }
        es.V.middleCols(row, k) = svd.matrixV().rightCols(k);
        es.lambdas.push_back(lam);
        es.multiplicity.push_back(static_cast<int>(k));
        row += k;
    }

    Eigen::JacobiSVD<Mat> ssvd(es.S);
    const Vec& ss = ssvd.singularValues();
    es.condS = ss[ss.size() - 1] > 0 ? ss[0] / ss[ss.size() - 1]
                                     : std::numeric_limits<double>::infinity();
    if (!(es.condS <= tols.cond)) {
        std::ostringstream os;
        os << "diagonalizer too ill-conditioned: cond(S) = " << es.condS;
        throw Defective(os.str());
    }
    for (std::size_t c = 1; c < es.lambdas.size(); ++c) {
        es.gap = std::min(es.gap, es.lambdas[c] - es.lambdas[c - 1]);
    }
    es.P = build_symmetrizer(es);
    return es;
}

EigenStructure symbol_structure(const SystemDef& sys, double t, const Vec& x,
                                const Vec& state, const Vec& xi, const ToleranceSet& tols) {
    if (xi.norm() == 0.0) {
        EigenStructure es;
        const int m = sys.m;
        es.lambdas = {0.0};
        es.multiplicity = {m};
        es.S = Mat::Identity(m, m);
        es.V = Mat::Identity(m, m);
        es.D = Mat::Zero(m, m);
        es.P = Mat::Identity(m, m);
        return es;
    }
    return eigendecompose(assemble_symbol(sys, t, x, state, xi), tols);
}

std::vector<Mat> build_projections(const EigenStructure& es, const ToleranceSet& tols) {
    std::vector<Mat> out;
    for (int c = 0; c < es.clusters(); ++c) {
        const int off = es.offset(c);
        const int k = es.multiplicity[static_cast<std::size_t>(c)];
        const Mat W = es.S.middleRows(off, k);
        const Mat V = es.V.middleCols(off, k);
        Mat Pc = V * (W * V).partialPivLu().solve(W);
        if (!(Pc.norm() <= 1.0 / tols.rank)) {
            throw IllConditionedProjection("spectral projection norm exceeds 1/rank tolerance");
        }
        out.push_back(std::move(Pc));
    }
    return out;
}

Mat build_symmetrizer(const EigenStructure& es) {
    Mat P = es.S.transpose() * es.S;
    return 0.5 * (P + P.transpose());
}

Mat contour_projection(const Mat& A, double center, double radius, int nodes) {
    using cd = std::complex<double>;
    const auto m = A.rows();
    const Eigen::MatrixXcd Ac = A.cast<cd>();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m, m);
    for (int k = 0; k < nodes; ++k) {
        const double theta = 2.0 * std::numbers::pi * (k + 0.5) / nodes;
        const cd e = std::polar(1.0, theta);
        const cd z = center + radius * e;
        Eigen::MatrixXcd zA = z * Eigen::MatrixXcd::Identity(m, m) - Ac;
        acc += (radius * e) * zA.partialPivLu().inverse();
    }
    return (acc / static_cast<double>(nodes)).real();
}

double spectral_radius_bound(const SystemDef& sys, double t, const Vec& x, const Vec& state) {
    double total = 0.0;
    for (int i = 0; i < sys.N; ++i) {
        const Mat Ai = sys.coeff(t, x, state, i);
        if (sys.m == 1) {
            total += std::abs(Ai(0, 0));
            continue;
        }
        Eigen::EigenSolver<Mat> solver(Ai, false);
        total += solver.eigenvalues().cwiseAbs().maxCoeff();
    }
    return total;
}

std::vector<Vec> unit_directions(int N, int count) {
    std::vector<Vec> dirs;
    if (N == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        if (count > 1) dirs.push_back(Vec::Constant(1, -1.0));
        return dirs;
    }
    for (int k = 0; k < count; ++k) {
        Vec d(N);
        if (N == 2) {
            const double th = 2.0 * std::numbers::pi * k / count;
            d << std::cos(th), std::sin(th);
        } else if (N == 3) {
            const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            d << r * std::cos(golden * k), r * std::sin(golden * k), z;
        } else {
            d.setZero();
            d[k % N] = (k / N) % 2 == 0 ? 1.0 : -1.0;
        }
        dirs.push_back(d);
    }
    return dirs;
}

HyperbolicityReport scan_hyperbolicity(const SystemDef& sys, const SamplePlan& plan) {
    if (plan.times.empty() || plan.points.empty() || plan.states.empty() ||
        plan.directions.empty()) {
        throw EmptyPlan("sample plan has an empty sample set");
    }
    HyperbolicityReport rep;
    rep.worst_condS = 0.0;
    double lam0 = std::numeric_limits<double>::infinity();
    double lam1 = -std::numeric_limits<double>::infinity();

    auto record = [&](double t, const Vec& x, const Vec& z, const Vec& xi, FailureKind kind,
                      const std::string& msg) {
        rep.pass = false;
        ++rep.failures;
        if (static_cast<int>(rep.witnesses.size()) < plan.max_witnesses) {
            rep.witnesses.push_back({t, x, z, xi, kind, msg});
        }
    };

    for (double t : plan.times) {
        for (const Vec& x : plan.points) {
            for (const Vec& z : plan.states) {
                const bool in_ball = z.norm() <= plan.radius;
                for (const Vec& raw : plan.directions) {
                    const Vec xi = raw / raw.norm();
                    ++rep.samples;
                    try {
                        const Mat A = assemble_symbol(sys, t, x, z, xi);
                        const EigenStructure es = eigendecompose(A, plan.tols);
                        rep.worst_imag = std::max(rep.worst_imag, es.imag_ratio);
                        rep.worst_condS = std::max(rep.worst_condS, es.condS);
                        rep.min_gap = std::min(rep.min_gap, es.gap);
                        Eigen::SelfAdjointEigenSolver<Mat> pe(es.P, Eigen::EigenvaluesOnly);
                        lam1 = std::max(lam1, pe.eigenvalues().maxCoeff());
                        if (in_ball) lam0 = std::min(lam0, pe.eigenvalues().minCoeff());
                    } catch (const ComplexSpectrum& e) {
                        rep.worst_imag = std::max(rep.worst_imag, e.imag_ratio);
                        record(t, x, z, xi, FailureKind::ComplexSpectrum, e.what());
                    } catch (const Defective& e) {
                        record(t, x, z, xi, FailureKind::Defective, e.what());
                    } catch (const EvaluationOutsideDomain& e) {
                        record(t, x, z, xi, FailureKind::OutsideDomain, e.what());
                    } catch (const SingularTimeMatrix& e) {
                        record(t, x, z, xi, FailureKind::Singular, e.what());
                    }
                }
            }
        }
    }
    if (std::isfinite(lam0)) rep.lambda0 = lam0;
    if (std::isfinite(lam1)) rep.lambda1 = lam1;
    return rep;
}

}  // namespace thyp
