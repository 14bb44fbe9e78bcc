#include "fpsi/sparse.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <sstream>

namespace fpsi {

Vector spmv(const SparseMatrix& a, const Vector& x)
{
    if (a.cols() != x.size()) {
        throw ConfigError("spmv: dimension mismatch (" + std::to_string(a.cols()) + " columns, vector of " +
                          std::to_string(x.size()) + ")");
    }
    return a * x;
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct Symbolic {
    int n = 0;
    std::vector<int> perm, pinv;
    ColMatrix c; // permuted matrix
    std::vector<int> parent;
    std::vector<int> colptr; // column pointers of L (strictly lower part plus diagonal slot)
};

// Nonzero pattern of row k of L, in topological order, returned in
// s[top..n-1]. `flag` entries equal to k mark visited nodes.
int ereach(const ColMatrix& c, int k, const std::vector<int>& parent, std::vector<int>& s, std::vector<int>& flag)
{
    const int n = static_cast<int>(c.cols());
    int top = n;
    flag[static_cast<std::size_t>(k)] = k;
    const int* cp = c.outerIndexPtr();
    const int* ci = c.innerIndexPtr();
    for (int p = cp[k]; p < cp[k + 1]; ++p) {
        int i = ci[p];
        if (i > k) continue;
        int len = 0;
        for (; flag[static_cast<std::size_t>(i)] != k; i = parent[static_cast<std::size_t>(i)]) {
            s[static_cast<std::size_t>(len++)] = i;
            flag[static_cast<std::size_t>(i)] = k;
        }
        while (len > 0) s[static_cast<std::size_t>(--top)] = s[static_cast<std::size_t>(--len)];
    }
    return top;
}

Symbolic analyze(const SparseMatrix& a, const std::string& name)
{
    if (a.rows() != a.cols()) throw ConfigError("factorization of " + name + ": matrix is not square");
    Symbolic sym;
    const int n = static_cast<int>(a.rows());
    sym.n = n;

    ColMatrix ac = a;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> amd;
    Eigen::AMDOrdering<int> ordering;
    ordering(ac, amd);
    sym.perm.assign(amd.indices().data(), amd.indices().data() + n);
    sym.pinv.assign(static_cast<std::size_t>(n), 0);
    for (int k = 0; k < n; ++k) sym.pinv[static_cast<std::size_t>(sym.perm[static_cast<std::size_t>(k)])] = k;

    std::vector<Eigen::Triplet<double, int>> trips;
    trips.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (int i = 0; i < a.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
            trips.emplace_back(sym.pinv[static_cast<std::size_t>(i)], sym.pinv[static_cast<std::size_t>(it.col())],
                               it.value());
        }
    }
    sym.c.resize(n, n);
    sym.c.setFromTriplets(trips.begin(), trips.end());
    sym.c.makeCompressed();

    // Elimination tree from the upper triangle.
    sym.parent.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> ancestor(static_cast<std::size_t>(n), -1);
    const int* cp = sym.c.outerIndexPtr();
    const int* ci = sym.c.innerIndexPtr();
    for (int k = 0; k < n; ++k) {
        for (int p = cp[k]; p < cp[k + 1]; ++p) {
            int i = ci[p];
            while (i != -1 && i < k) {
                const int next = ancestor[static_cast<std::size_t>(i)];
                ancestor[static_cast<std::size_t>(i)] = k;
                if (next == -1) sym.parent[static_cast<std::size_t>(i)] = k;
                i = next;
            }
        }
    }

    // Column counts of L (diagonal included).
    std::vector<int> counts(static_cast<std::size_t>(n), 1);
    std::vector<int> s(static_cast<std::size_t>(n)), flag(static_cast<std::size_t>(n), -1);
    for (int k = 0; k < n; ++k) {
        const int top = ereach(sym.c, k, sym.parent, s, flag);
        for (int t = top; t < n; ++t) ++counts[static_cast<std::size_t>(s[static_cast<std::size_t>(t)])];
    }
    sym.colptr.assign(static_cast<std::size_t>(n + 1), 0);
    for (int j = 0; j < n; ++j) sym.colptr[static_cast<std::size_t>(j + 1)] = sym.colptr[static_cast<std::size_t>(j)] + counts[static_cast<std::size_t>(j)];
    return sym;
}

std::string pivot_message(const std::string& name, const char* kind, int original_index, double value)
{
    std::ostringstream os;
    os << name << " is not " << kind << ": pivot " << original_index << " has value " << value;
    return os.str();
}

} // namespace

SparseCholesky::SparseCholesky(const SparseMatrix& a, std::string name) : name_(std::move(name))
{
    Symbolic sym = analyze(a, name_);
    n_ = sym.n;
    perm_ = std::move(sym.perm);
    pinv_ = std::move(sym.pinv);
    Lp_ = sym.colptr;
    Li_.assign(static_cast<std::size_t>(Lp_.back()), 0);
    Lx_.assign(static_cast<std::size_t>(Lp_.back()), 0.0);

    // Each column keeps its diagonal in the first slot.
    std::vector<int> next(Lp_.begin(), Lp_.end() - 1);
    std::vector<double> x(static_cast<std::size_t>(n_), 0.0);
    std::vector<int> s(static_cast<std::size_t>(n_)), flag(static_cast<std::size_t>(n_), -1);
    const int* cp = sym.c.outerIndexPtr();
    const int* ci = sym.c.innerIndexPtr();
    const double* cx = sym.c.valuePtr();
    for (int k = 0; k < n_; ++k) {
        int top = ereach(sym.c, k, sym.parent, s, flag);
        x[static_cast<std::size_t>(k)] = 0.0;
        for (int p = cp[k]; p < cp[k + 1]; ++p) {
            if (ci[p] <= k) x[static_cast<std::size_t>(ci[p])] += cx[p];
        }
        double d = x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(k)] = 0.0;
        for (; top < n_; ++top) {
            const int i = s[static_cast<std::size_t>(top)];
            const double lki = x[static_cast<std::size_t>(i)] / Lx_[static_cast<std::size_t>(Lp_[static_cast<std::size_t>(i)])];
            x[static_cast<std::size_t>(i)] = 0.0;
            for (int p = Lp_[static_cast<std::size_t>(i)] + 1; p < next[static_cast<std::size_t>(i)]; ++p) {
                x[static_cast<std::size_t>(Li_[static_cast<std::size_t>(p)])] -= Lx_[static_cast<std::size_t>(p)] * lki;
            }
            d -= lki * lki;
            const int p = next[static_cast<std::size_t>(i)]++;
            Li_[static_cast<std::size_t>(p)] = k;
            Lx_[static_cast<std::size_t>(p)] = lki;
        }
        if (!(d > 0.0)) {
            throw NumericalError(pivot_message(name_, "positive definite", perm_[static_cast<std::size_t>(k)], d));
        }
        const int p = next[static_cast<std::size_t>(k)]++;
        Li_[static_cast<std::size_t>(p)] = k;
        Lx_[static_cast<std::size_t>(p)] = std::sqrt(d);
    }
}

void SparseCholesky::solve_in_place(Vector& b) const
{
    if (b.size() != n_) throw ConfigError("solve with " + name_ + ": dimension mismatch");
    Vector x(n_);
    for (int k = 0; k < n_; ++k) x[k] = b[perm_[static_cast<std::size_t>(k)]];
    // R^T x1 = P^T b (forward with L)
    for (int j = 0; j < n_; ++j) {
        x[j] /= Lx_[static_cast<std::size_t>(Lp_[static_cast<std::size_t>(j)])];
        const double xj = x[j];
        for (int p = Lp_[static_cast<std::size_t>(j)] + 1; p < Lp_[static_cast<std::size_t>(j + 1)]; ++p) {
            x[Li_[static_cast<std::size_t>(p)]] -= Lx_[static_cast<std::size_t>(p)] * xj;
        }
    }
    // R x2 = x1 (backward with L^T)
    for (int j = n_ - 1; j >= 0; --j) {
        double xj = x[j];
        for (int p = Lp_[static_cast<std::size_t>(j)] + 1; p < Lp_[static_cast<std::size_t>(j + 1)]; ++p) {
            xj -= Lx_[static_cast<std::size_t>(p)] * x[Li_[static_cast<std::size_t>(p)]];
        }
        x[j] = xj / Lx_[static_cast<std::size_t>(Lp_[static_cast<std::size_t>(j)])];
    }
    // z = P x2
    for (int k = 0; k < n_; ++k) b[perm_[static_cast<std::size_t>(k)]] = x[k];
}

Vector SparseCholesky::solve(const Vector& b) const
{
    Vector x = b;
    solve_in_place(x);
    return x;
}

Eigen::SparseMatrix<double> SparseCholesky::upper_factor() const
{
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(Li_.size());
    for (int j = 0; j < n_; ++j) {
        for (int p = Lp_[static_cast<std::size_t>(j)]; p < Lp_[static_cast<std::size_t>(j + 1)]; ++p) {
            trips.emplace_back(j, Li_[static_cast<std::size_t>(p)], Lx_[static_cast<std::size_t>(p)]);
        }
    }
    Eigen::SparseMatrix<double> r(n_, n_);
    r.setFromTriplets(trips.begin(), trips.end());
    return r;
}

SparseLdlt::SparseLdlt(const SparseMatrix& a, std::string name) : name_(std::move(name))
{
    Symbolic sym = analyze(a, name_);
    n_ = sym.n;
    perm_ = std::move(sym.perm);
    pinv_ = std::move(sym.pinv);
    // Unit diagonal is implicit; each column stores its strictly lower part.
    Lp_.assign(static_cast<std::size_t>(n_ + 1), 0);
    for (int j = 0; j < n_; ++j) {
        const int cnt = sym.colptr[static_cast<std::size_t>(j + 1)] - sym.colptr[static_cast<std::size_t>(j)] - 1;
        Lp_[static_cast<std::size_t>(j + 1)] = Lp_[static_cast<std::size_t>(j)] + cnt;
    }
    Li_.assign(static_cast<std::size_t>(Lp_.back()), 0);
    Lx_.assign(static_cast<std::size_t>(Lp_.back()), 0.0);
    D_.assign(static_cast<std::size_t>(n_), 0.0);

    std::vector<int> next(Lp_.begin(), Lp_.end() - 1);
    std::vector<double> y(static_cast<std::size_t>(n_), 0.0);
    std::vector<int> s(static_cast<std::size_t>(n_)), flag(static_cast<std::size_t>(n_), -1);
    const int* cp = sym.c.outerIndexPtr();
    const int* ci = sym.c.innerIndexPtr();
    const double* cx = sym.c.valuePtr();
    double scale = 0.0;
    for (int p = 0; p < static_cast<int>(sym.c.nonZeros()); ++p) scale = std::max(scale, std::abs(cx[p]));
    for (int k = 0; k < n_; ++k) {
        int top = ereach(sym.c, k, sym.parent, s, flag);
        y[static_cast<std::size_t>(k)] = 0.0;
        for (int p = cp[k]; p < cp[k + 1]; ++p) {
            if (ci[p] <= k) y[static_cast<std::size_t>(ci[p])] += cx[p];
        }
        double d = y[static_cast<std::size_t>(k)];
        y[static_cast<std::size_t>(k)] = 0.0;
        for (; top < n_; ++top) {
            const int i = s[static_cast<std::size_t>(top)];
            const double yi = y[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(i)] = 0.0;
            for (int p = Lp_[static_cast<std::size_t>(i)]; p < next[static_cast<std::size_t>(i)]; ++p) {
                y[static_cast<std::size_t>(Li_[static_cast<std::size_t>(p)])] -= Lx_[static_cast<std::size_t>(p)] * yi;
            }
            const double lki = yi / D_[static_cast<std::size_t>(i)];
            d -= lki * yi;
            const int p = next[static_cast<std::size_t>(i)]++;
            Li_[static_cast<std::size_t>(p)] = k;
            Lx_[static_cast<std::size_t>(p)] = lki;
        }
        if (!(std::abs(d) > 1e-300 * std::max(1.0, scale)) || !std::isfinite(d)) {
            throw NumericalError(pivot_message(name_, "factorizable without pivoting", perm_[static_cast<std::size_t>(k)], d));
        }
        D_[static_cast<std::size_t>(k)] = d;
    }
}

Vector SparseLdlt::solve(const Vector& b) const
{
    if (b.size() != n_) throw ConfigError("solve with " + name_ + ": dimension mismatch");
    Vector x(n_);
    for (int k = 0; k < n_; ++k) x[k] = b[perm_[static_cast<std::size_t>(k)]];
    for (int j = 0; j < n_; ++j) {
        const double xj = x[j];
        for (int p = Lp_[static_cast<std::size_t>(j)]; p < Lp_[static_cast<std::size_t>(j + 1)]; ++p) {
            x[Li_[static_cast<std::size_t>(p)]] -= Lx_[static_cast<std::size_t>(p)] * xj;
        }
    }
    for (int j = 0; j < n_; ++j) x[j] /= D_[static_cast<std::size_t>(j)];
    for (int j = n_ - 1; j >= 0; --j) {
        double xj = x[j];
        for (int p = Lp_[static_cast<std::size_t>(j)]; p < Lp_[static_cast<std::size_t>(j + 1)]; ++p) {
            xj -= Lx_[static_cast<std::size_t>(p)] * x[Li_[static_cast<std::size_t>(p)]];
        }
        x[j] = xj;
    }
    Vector out(n_);
    for (int k = 0; k < n_; ++k) out[perm_[static_cast<std::size_t>(k)]] = x[k];
    return out;
}

DenseCholesky::DenseCholesky(const DenseMatrix& a, std::string name) : name_(std::move(name))
{
    if (a.rows() != a.cols()) throw ConfigError("factorization of " + name_ + ": matrix is not square");
    if (!a.allFinite()) throw NumericalError(name_ + " has non-finite entries");
    llt_.compute(a);
    if (llt_.info() == Eigen::Success) return;

    // Locate the failing pivot with an unblocked pass.
    DenseMatrix l = a;
    const Eigen::Index n = a.rows();
    for (Eigen::Index k = 0; k < n; ++k) {
        double d = l(k, k) - l.row(k).head(k).squaredNorm();
        if (!(d > 0.0)) throw NumericalError(pivot_message(name_, "positive definite", static_cast<int>(k), d));
        d = std::sqrt(d);
        l(k, k) = d;
        for (Eigen::Index i = k + 1; i < n; ++i) l(i, k) = (l(i, k) - l.row(i).head(k).dot(l.row(k).head(k))) / d;
    }
    throw NumericalError(name_ + " is not positive definite");
}

Vector DenseCholesky::solve(const Vector& b) const
{
    if (b.size() != llt_.rows()) throw ConfigError("solve with " + name_ + ": dimension mismatch");
    return llt_.solve(b);
}

DenseMatrix DenseCholesky::solve(const DenseMatrix& b) const
{
    if (b.rows() != llt_.rows()) throw ConfigError("solve with " + name_ + ": dimension mismatch");
    return llt_.solve(b);
}

DenseMatrix normal_product(const SparseMatrix& a0, const SparseMatrix& b, const SparseCholesky& w, double c)
{
    if (b.rows() != w.size()) throw ConfigError("normal_product: B rows do not match the factored matrix");
    const Eigen::Index m = b.cols();
    DenseMatrix out = DenseMatrix::Zero(m, m);
    if (a0.nonZeros() > 0 || a0.rows() > 0) {
        if (a0.rows() != m || a0.cols() != m) throw ConfigError("normal_product: A0 shape mismatch");
        out = to_dense(a0);
    }
    if (c == 0.0) return out;
    const ColMatrix bc = b;
    const SparseMatrix bt = b.transpose();
    Vector col(b.rows());
    for (Eigen::Index j = 0; j < m; ++j) {
        if (bc.outerIndexPtr()[j] == bc.outerIndexPtr()[j + 1]) continue;
        col.setZero();
        for (ColMatrix::InnerIterator it(bc, j); it; ++it) col[it.row()] = it.value();
        w.solve_in_place(col);
        out.col(j) += c * (bt * col);
    }
    const DenseMatrix sym = 0.5 * (out + out.transpose());
    return sym;
}

Vector lu_solve(const SparseMatrix& a, const Vector& b)
{
    if (a.rows() != a.cols() || a.rows() != b.size()) throw ConfigError("lu_solve: dimension mismatch");
    const ColMatrix ac = a;
    Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(ac);
    if (lu.info() != Eigen::Success) throw NumericalError("lu_solve: matrix is singular (" + lu.lastErrorMessage() + ")");
    Vector x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("lu_solve: solve failed");
    // Three steps of iterative refinement: the saddle-point systems here
    // pivot poorly and otherwise lose digits in the small multiplier blocks.
    for (int k = 0; k < 3; ++k) {
        const Vector dx = lu.solve(Vector(b - a * x));
        if (!dx.allFinite()) break;
        x += dx;
    }
    return x;
}

double cond2(const DenseMatrix& a)
{
    if (a.size() == 0) throw ConfigError("cond2: empty matrix");
    if (!a.allFinite()) throw NumericalError("cond2: non-finite entries");
    Eigen::BDCSVD<DenseMatrix> svd(a);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (smin < 1e-300) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

DenseMatrix probe_dense(const LinearOperator& op, int n, int cap)
{
    if (n > cap) {
        throw ConfigError("probe_dense: dimension " + std::to_string(n) + " exceeds the probing cap " +
                          std::to_string(cap) + "; use a coarser mesh");
    }
    DenseMatrix out(n, n);
    Vector e = Vector::Zero(n);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vector col = op(e);
        if (col.size() != n) throw ConfigError("probe_dense: operator returned a vector of the wrong size");
        out.col(j) = col;
        e[j] = 0.0;
    }
    return out;
}

DenseMatrix to_dense(const SparseMatrix& a)
{
    return DenseMatrix(a);
}

SparseMatrix block_matrix(int rows, int cols, const std::vector<BlockEntry>& blocks)
{
    std::vector<Triplet> trips;
    std::size_t nnz = 0;
    for (const auto& b : blocks) nnz += static_cast<std::size_t>(b.m->nonZeros());
    trips.reserve(nnz);
    for (const auto& b : blocks) {
        const Eigen::Index br = b.transpose ? b.m->cols() : b.m->rows();
        const Eigen::Index bc = b.transpose ? b.m->rows() : b.m->cols();
        if (b.row + br > rows || b.col + bc > cols) throw ConfigError("block_matrix: block exceeds the matrix shape");
        for (int i = 0; i < b.m->outerSize(); ++i) {
            for (SparseMatrix::InnerIterator it(*b.m, i); it; ++it) {
                const int r = b.transpose ? static_cast<int>(it.col()) : i;
                const int c = b.transpose ? i : static_cast<int>(it.col());
                trips.emplace_back(b.row + r, b.col + c, b.scale * it.value());
            }
        }
    }
    SparseMatrix out(rows, cols);
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

double asymmetry(const SparseMatrix& a)
{
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    const SparseMatrix d = a - SparseMatrix(a.transpose());
    double m = 0.0;
    for (int i = 0; i < d.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(d, i); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

} // namespace fpsi
