#include "stdg/forms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stdg
{
    FacePenalties penalties(const SpatialMesh& mesh, int face, int p, double tau, const PenaltyConfig& cfg)
    {
        return penalties(mesh.faces.at(face).h, mesh.a_max(), p, tau, cfg);
    }

    FacePenalties penalties(double h, double Ca, int p, double tau, const PenaltyConfig& cfg)
    {
        if (!(tau > 0.0) || !(h > 0.0))
            throw std::invalid_argument("penalties: tau and h_e must be positive");
        const double pp = p;
        FacePenalties s;
        s.sigma0 = cfg.C_sigma0 * pp * pp / h;
        s.sigma1 = cfg.sigma1_enabled ? Ca * pp * pp * pp / (h * tau) : 0.0;
        s.sigma2 = cfg.sigma2_enabled ? h / (Ca * tau) : 0.0;
        return s;
    }

    namespace
    {
        using Eigen::MatrixXd;
        using Eigen::VectorXd;

        // Basis data of one element at a list of points; columns are points.
        struct ElemBlock
        {
            MatrixXd v, vt, vtt;
            std::array<MatrixXd, 3> g, gt;
        };

        void elem_block(const SlabSpace& s, int e, const std::vector<Point>& x, const std::vector<double>& t,
                        ElemBlock& b)
        {
            const int n = s.n_local(e), nq = static_cast<int>(x.size()), d = s.mesh().dim;
            b.v.resize(n, nq);
            b.vt.resize(n, nq);
            b.vtt.resize(n, nq);
            for (int i = 0; i < d; ++i)
            {
                b.g[i].resize(n, nq);
                b.gt[i].resize(n, nq);
            }
            BasisValues bv;
            for (int k = 0; k < nq; ++k)
            {
                s.eval_basis(e, x[k], t[k], bv);
                b.v.col(k) = bv.v;
                b.vt.col(k) = bv.vt;
                b.vtt.col(k) = bv.vtt;
                for (int i = 0; i < d; ++i)
                {
                    b.g[i].col(k) = bv.g[i];
                    b.gt[i].col(k) = bv.gt[i];
                }
            }
        }

        // Scalar face quantities of every basis function of K+ (rows 0..np) and K- (rows np..).
        struct FaceBlock
        {
            int np = 0, nm = 0;
            MatrixXd J, Jt, FA, FAt, FJ, AVt;
        };

        void face_block(const SlabSpace& s, int f, const std::vector<Point>& x, const std::vector<double>& t,
                        FaceBlock& b)
        {
            const SpatialMesh& mesh = s.mesh();
            const Face& face = mesh.faces[f];
            const int d = mesh.dim;
            const bool interior = face.elements[1] >= 0;
            b.np = s.n_local(face.elements[0]);
            b.nm = interior ? s.n_local(face.elements[1]) : 0;
            const int rows = b.np + b.nm, nq = static_cast<int>(x.size());
            for (MatrixXd* m : {&b.J, &b.Jt, &b.FA, &b.FAt, &b.FJ, &b.AVt})
                m->setZero(rows, nq);
            BasisValues bv;
            for (int side = 0; side < (interior ? 2 : 1); ++side)
            {
                const int e = face.elements[side];
                const double a = mesh.elements[e].a;
                const double sign = side == 0 ? 1.0 : -1.0;
                const double avg = interior ? 0.5 : 1.0;
                const int r0 = side == 0 ? 0 : b.np;
                const int n = s.n_local(e);
                for (int k = 0; k < nq; ++k)
                {
                    s.eval_basis(e, x[k], t[k], bv);
                    VectorXd flux = VectorXd::Zero(n), flux_t = VectorXd::Zero(n);
                    for (int i = 0; i < d; ++i)
                    {
                        flux += (a * face.normal[i]) * bv.g[i];
                        flux_t += (a * face.normal[i]) * bv.gt[i];
                    }
                    b.J.block(r0, k, n, 1) = sign * bv.v;
                    b.Jt.block(r0, k, n, 1) = sign * bv.vt;
                    b.FA.block(r0, k, n, 1) = avg * flux;
                    b.FAt.block(r0, k, n, 1) = avg * flux_t;
                    if (interior)
                    {
                        b.FJ.block(r0, k, n, 1) = sign * flux;
                        b.AVt.block(r0, k, n, 1) = 0.5 * bv.vt;
                    }
                }
            }
        }

        // Dense element-pair blocks, one per element and two per interior face, turned
        // into a column-ordered sparse matrix at the end.
        class BlockAccumulator
        {
        public:
            explicit BlockAccumulator(const SlabSpace& s) : s_(s)
            {
                const SpatialMesh& mesh = s.mesh();
                diag_.resize(mesh.n_elements());
                for (int e = 0; e < mesh.n_elements(); ++e)
                    diag_[e].setZero(s.n_local(e), s.n_local(e));
                off_.resize(mesh.n_faces());
                for (int f = 0; f < mesh.n_faces(); ++f)
                {
                    const Face& face = mesh.faces[f];
                    if (face.elements[1] < 0)
                        continue;
                    const int np = s.n_local(face.elements[0]), nm = s.n_local(face.elements[1]);
                    off_[f][0].setZero(np, nm);
                    off_[f][1].setZero(nm, np);
                }
            }

            void add_elem(int e, const MatrixXd& m) { diag_[e] += m; }

            // m is (np + nm) square, ordered K+ then K-.
            void add_face(int f, const MatrixXd& m)
            {
                const Face& face = s_.mesh().faces[f];
                const int np = s_.n_local(face.elements[0]);
                diag_[face.elements[0]] += m.topLeftCorner(np, np);
                if (face.elements[1] < 0)
                    return;
                const int nm = s_.n_local(face.elements[1]);
                diag_[face.elements[1]] += m.bottomRightCorner(nm, nm);
                off_[f][0] += m.topRightCorner(np, nm);
                off_[f][1] += m.bottomLeftCorner(nm, np);
            }

            SparseMatrix finish() const
            {
                const SpatialMesh& mesh = s_.mesh();
                const int n = s_.n_dofs();
                // Column block e: (row element, block) pairs sorted by row offset.
                std::vector<std::vector<std::pair<int, const MatrixXd*>>> cols(mesh.n_elements());
                for (int e = 0; e < mesh.n_elements(); ++e)
                    cols[e].push_back({e, &diag_[e]});
                for (int f = 0; f < mesh.n_faces(); ++f)
                {
                    const Face& face = mesh.faces[f];
                    if (face.elements[1] < 0)
                        continue;
                    cols[face.elements[1]].push_back({face.elements[0], &off_[f][0]});
                    cols[face.elements[0]].push_back({face.elements[1], &off_[f][1]});
                }
                Eigen::VectorXi nnz(n);
                for (int e = 0; e < mesh.n_elements(); ++e)
                {
                    std::sort(cols[e].begin(), cols[e].end(),
                              [](const auto& a, const auto& b) { return a.first < b.first; });
                    int rows = 0;
                    for (const auto& [re, blk] : cols[e])
                        rows += static_cast<int>(blk->rows());
                    for (int j = 0; j < s_.n_local(e); ++j)
                        nnz[s_.offset(e) + j] = rows;
                }
                SparseMatrix A(n, n);
                A.reserve(nnz);
                for (int e = 0; e < mesh.n_elements(); ++e)
                    for (int j = 0; j < s_.n_local(e); ++j)
                        for (const auto& [re, blk] : cols[e])
                            for (int i = 0; i < blk->rows(); ++i)
                                A.insert(s_.offset(re) + i, s_.offset(e) + j) = (*blk)(i, j);
                A.makeCompressed();
                return A;
            }

        private:
            const SlabSpace& s_;
            std::vector<MatrixXd> diag_;
            std::vector<std::array<MatrixXd, 2>> off_;
        };

        // rows(test) x W x cols(trial)^T
        MatrixXd wprod(const MatrixXd& test, const VectorXd& w, const MatrixXd& trial)
        {
            return test * w.asDiagonal() * trial.transpose();
        }

        VectorXd weights(const QuadRule& q) { return Eigen::Map<const VectorXd>(q.w.data(), q.size()); }

        // Element end-time block: (vt, vt) + (a grad, grad).
        MatrixXd elem_trace_block(const ElemBlock& b, const VectorXd& w, double a, int d)
        {
            MatrixXd m = wprod(b.vt, w, b.vt);
            for (int i = 0; i < d; ++i)
                m += a * wprod(b.g[i], w, b.g[i]);
            return m;
        }

        // Face end-time block: -FA_j J_i - J_j FA_i + sigma0 J_j J_i.
        MatrixXd face_trace_block(const FaceBlock& b, const VectorXd& w, double sigma0)
        {
            return -wprod(b.J, w, b.FA) - wprod(b.FA, w, b.J) + sigma0 * wprod(b.J, w, b.J);
        }

        int resolve_degree(const SlabSpace& s, int quad_degree)
        {
            return quad_degree < 0 ? assembly_degree(s.degree()) : quad_degree;
        }
    } // namespace

    SparseMatrix assemble_an(const SlabSpace& space, const PenaltyConfig& cfg, int quad_degree)
    {
        const SpatialMesh& mesh = space.mesh();
        const int deg = resolve_degree(space, quad_degree);
        const int d = mesh.dim, p = space.degree();
        const double t0 = space.t0(), t1 = space.t1();
        BlockAccumulator acc(space);
        ElemBlock eb;
        for (int e = 0; e < mesh.n_elements(); ++e)
        {
            const double a = mesh.elements[e].a;
            const QuadRule vq = volume_quadrature(mesh, e, t0, t1, deg);
            elem_block(space, e, vq.x, vq.t, eb);
            const VectorXd w = weights(vq);
            // (utt, vt) + (a grad u, grad vt)
            MatrixXd m = wprod(eb.vt, w, eb.vtt);
            for (int i = 0; i < d; ++i)
                m += a * wprod(eb.gt[i], w, eb.g[i]);

            const QuadRule tq = trace_quadrature(mesh, TraceEntity::Element, e, t0, deg);
            elem_block(space, e, tq.x, tq.t, eb);
            m += elem_trace_block(eb, weights(tq), a, d);
            acc.add_elem(e, m);
        }
        FaceBlock fb;
        const double Ca = mesh.a_max();
        for (int f = 0; f < mesh.n_faces(); ++f)
        {
            const FacePenalties s = penalties(mesh.faces[f].h, Ca, p, t1 - t0, cfg);
            const QuadRule fq = face_time_quadrature(mesh, f, t0, t1, deg);
            face_block(space, f, fq.x, fq.t, fb);
            const VectorXd w = weights(fq);
            MatrixXd m = -wprod(fb.Jt, w, fb.FA) - wprod(fb.FAt, w, fb.J) + s.sigma0 * wprod(fb.Jt, w, fb.J) +
                         s.sigma1 * wprod(fb.J, w, fb.J) + s.sigma2 * wprod(fb.FJ, w, fb.FJ);

            const QuadRule tq = trace_quadrature(mesh, TraceEntity::Face, f, t0, deg);
            face_block(space, f, tq.x, tq.t, fb);
            m += face_trace_block(fb, weights(tq), s.sigma0);
            acc.add_face(f, m);
        }
        return acc.finish();
    }

    SparseMatrix assemble_an_skeleton(const SlabSpace& space, const PenaltyConfig& cfg, int quad_degree)
    {
        if (space.kind() != SpaceKind::Trefftz)
            throw std::invalid_argument("assemble_an_skeleton: requires a Trefftz space");
        const SpatialMesh& mesh = space.mesh();
        const int deg = resolve_degree(space, quad_degree);
        const int d = mesh.dim, p = space.degree();
        const double t0 = space.t0(), t1 = space.t1();
        BlockAccumulator acc(space);
        ElemBlock eb;
        for (int e = 0; e < mesh.n_elements(); ++e)
        {
            const QuadRule tq = trace_quadrature(mesh, TraceEntity::Element, e, t1, deg);
            elem_block(space, e, tq.x, tq.t, eb);
            acc.add_elem(e, elem_trace_block(eb, weights(tq), mesh.elements[e].a, d));
        }
        FaceBlock fb;
        const double Ca = mesh.a_max();
        for (int f = 0; f < mesh.n_faces(); ++f)
        {
            const FacePenalties s = penalties(mesh.faces[f].h, Ca, p, t1 - t0, cfg);
            const QuadRule fq = face_time_quadrature(mesh, f, t0, t1, deg);
            face_block(space, f, fq.x, fq.t, fb);
            const VectorXd w = weights(fq);
            MatrixXd m = wprod(fb.J, w, fb.FAt) - s.sigma0 * wprod(fb.J, w, fb.Jt) - wprod(fb.FJ, w, fb.AVt) +
                         s.sigma1 * wprod(fb.J, w, fb.J) + s.sigma2 * wprod(fb.FJ, w, fb.FJ);

            const QuadRule tq = trace_quadrature(mesh, TraceEntity::Face, f, t1, deg);
            face_block(space, f, tq.x, tq.t, fb);
            m += face_trace_block(fb, weights(tq), s.sigma0);
            acc.add_face(f, m);
        }
        return acc.finish();
    }

    SliceQuadrature::SliceQuadrature(const SpatialMesh& mesh, int deg) : degree(deg)
    {
        elem_start.push_back(0);
        for (int e = 0; e < mesh.n_elements(); ++e)
        {
            const QuadRule q = element_rule(mesh, e, deg);
            elem_x.insert(elem_x.end(), q.x.begin(), q.x.end());
            elem_w.insert(elem_w.end(), q.w.begin(), q.w.end());
            elem_start.push_back(static_cast<int>(elem_w.size()));
        }
        face_start.push_back(0);
        for (int f = 0; f < mesh.n_faces(); ++f)
        {
            const QuadRule q = face_rule(mesh, f, deg);
            face_x.insert(face_x.end(), q.x.begin(), q.x.end());
            face_w.insert(face_w.end(), q.w.begin(), q.w.end());
            face_start.push_back(static_cast<int>(face_w.size()));
        }
    }

    TraceData& TraceData::operator-=(const TraceData& o)
    {
        auto sub = [](std::vector<double>& a, const std::vector<double>& b) {
            if (a.size() != b.size())
                throw std::invalid_argument("TraceData: size mismatch");
            for (std::size_t i = 0; i < a.size(); ++i)
                a[i] -= b[i];
        };
        sub(u, o.u);
        sub(ut, o.ut);
        sub(grad, o.grad);
        sub(J, o.J);
        sub(FA, o.FA);
        return *this;
    }

    namespace
    {
        // J and FA at one face point from the two one-sided traces.
        void face_jump_avg(const SpatialMesh& mesh, const Face& face, const FieldValue& plus, const FieldValue& minus,
                           double& J, double& FA)
        {
            const int d = mesh.dim;
            const double ap = mesh.elements[face.elements[0]].a;
            double fp = 0.0;
            for (int i = 0; i < d; ++i)
                fp += ap * plus.grad[i] * face.normal[i];
            if (face.elements[1] < 0)
            {
                J = plus.u;
                FA = fp;
                return;
            }
            const double am = mesh.elements[face.elements[1]].a;
            double fm = 0.0;
            for (int i = 0; i < d; ++i)
                fm += am * minus.grad[i] * face.normal[i];
            J = plus.u - minus.u;
            FA = 0.5 * (fp + fm);
        }
    } // namespace

    TraceData trace_data(const SlabFunction& f, const SpatialMesh& mesh, const SliceQuadrature& q, double t)
    {
        const int d = mesh.dim;
        TraceData out;
        out.dim = d;
        out.u.resize(q.n_elem_points());
        out.ut.resize(q.n_elem_points());
        out.grad.resize(static_cast<std::size_t>(q.n_elem_points()) * d);
        for (int e = 0; e < mesh.n_elements(); ++e)
            for (int k = q.elem_start[e]; k < q.elem_start[e + 1]; ++k)
            {
                const FieldValue v = f.eval(e, q.elem_x[k], t);
                out.u[k] = v.u;
                out.ut[k] = v.ut;
                for (int i = 0; i < d; ++i)
                    out.grad[static_cast<std::size_t>(k) * d + i] = v.grad[i];
            }
        out.J.resize(q.n_face_points());
        out.FA.resize(q.n_face_points());
        FieldValue plus, minus;
        for (int fi = 0; fi < mesh.n_faces(); ++fi)
        {
            const Face& face = mesh.faces[fi];
            for (int k = q.face_start[fi]; k < q.face_start[fi + 1]; ++k)
            {
                f.eval_face(face, q.face_x[k], t, plus, minus);
                face_jump_avg(mesh, face, plus, minus, out.J[k], out.FA[k]);
            }
        }
        return out;
    }

    SliceTables::SliceTables(std::shared_ptr<const SpaceLayout> layout, std::shared_ptr<const SliceQuadrature> quad)
        : layout_(std::move(layout)), quad_(std::move(quad))
    {
        const SpatialMesh& mesh = layout_->mesh();
        const SliceQuadrature& q = *quad_;
        const int d = mesh.dim;
        const SlabSpace space(layout_, 0.0, layout_->tau());
        BasisValues bv;
        for (int side = 0; side < 2; ++side)
        {
            const double t = side == 0 ? 0.0 : layout_->tau();
            Side& s = sides_[side];
            s.v.resize(mesh.n_elements());
            s.vt.resize(mesh.n_elements());
            s.g.resize(mesh.n_elements());
            for (int e = 0; e < mesh.n_elements(); ++e)
            {
                const int n = layout_->n_local(e), k0 = q.elem_start[e], nq = q.elem_start[e + 1] - k0;
                s.v[e].resize(n, nq);
                s.vt[e].resize(n, nq);
                for (int i = 0; i < d; ++i)
                    s.g[e][i].resize(n, nq);
                for (int k = 0; k < nq; ++k)
                {
                    space.eval_basis(e, q.elem_x[k0 + k], t, bv);
                    s.v[e].col(k) = bv.v;
                    s.vt[e].col(k) = bv.vt;
                    for (int i = 0; i < d; ++i)
                        s.g[e][i].col(k) = bv.g[i];
                }
            }
            s.fv.resize(mesh.n_faces());
            s.fflux.resize(mesh.n_faces());
            for (int f = 0; f < mesh.n_faces(); ++f)
            {
                const Face& face = mesh.faces[f];
                const int k0 = q.face_start[f], nq = q.face_start[f + 1] - k0;
                for (int side_e = 0; side_e < 2; ++side_e)
                {
                    const int e = face.elements[side_e];
                    if (e < 0)
                        continue;
                    const int n = layout_->n_local(e);
                    const double a = mesh.elements[e].a;
                    s.fv[f][side_e].resize(n, nq);
                    s.fflux[f][side_e].setZero(n, nq);
                    for (int k = 0; k < nq; ++k)
                    {
                        space.eval_basis(e, q.face_x[k0 + k], t, bv);
                        s.fv[f][side_e].col(k) = bv.v;
                        for (int i = 0; i < d; ++i)
                            s.fflux[f][side_e].col(k) += (a * face.normal[i]) * bv.g[i];
                    }
                }
            }
        }
        const PenaltyConfig unit{1.0, false, false};
        sigma0_.resize(mesh.n_faces());
        const double Ca = mesh.a_max();
        for (int f = 0; f < mesh.n_faces(); ++f)
            sigma0_[f] = penalties(mesh.faces[f].h, Ca, layout_->degree(), layout_->tau(), unit).sigma0;
    }

    TraceData SliceTables::trace(std::span<const double> coeffs, int side) const
    {
        const SpatialMesh& mesh = layout_->mesh();
        const SliceQuadrature& q = *quad_;
        const Side& s = sides_.at(side);
        const int d = mesh.dim;
        if (static_cast<int>(coeffs.size()) != layout_->n_dofs())
            throw std::invalid_argument("SliceTables::trace: coefficient vector has wrong length");
        TraceData out;
        out.dim = d;
        out.u.resize(q.n_elem_points());
        out.ut.resize(q.n_elem_points());
        out.grad.resize(static_cast<std::size_t>(q.n_elem_points()) * d);
        for (int e = 0; e < mesh.n_elements(); ++e)
        {
            Eigen::Map<const VectorXd> c(coeffs.data() + layout_->offset(e), layout_->n_local(e));
            const int k0 = q.elem_start[e], nq = q.elem_start[e + 1] - k0;
            Eigen::Map<VectorXd>(out.u.data() + k0, nq).noalias() = s.v[e].transpose() * c;
            Eigen::Map<VectorXd>(out.ut.data() + k0, nq).noalias() = s.vt[e].transpose() * c;
            for (int i = 0; i < d; ++i)
            {
                const VectorXd g = s.g[e][i].transpose() * c;
                for (int k = 0; k < nq; ++k)
                    out.grad[static_cast<std::size_t>(k0 + k) * d + i] = g[k];
            }
        }
        out.J.resize(q.n_face_points());
        out.FA.resize(q.n_face_points());
        for (int f = 0; f < mesh.n_faces(); ++f)
        {
            const Face& face = mesh.faces[f];
            const int k0 = q.face_start[f], nq = q.face_start[f + 1] - k0;
            const int ep = face.elements[0], em = face.elements[1];
            Eigen::Map<const VectorXd> cp(coeffs.data() + layout_->offset(ep), layout_->n_local(ep));
            Eigen::Map<VectorXd> J(out.J.data() + k0, nq), FA(out.FA.data() + k0, nq);
            J.noalias() = s.fv[f][0].transpose() * cp;
            FA.noalias() = s.fflux[f][0].transpose() * cp;
            if (em >= 0)
            {
                Eigen::Map<const VectorXd> cm(coeffs.data() + layout_->offset(em), layout_->n_local(em));
                J.noalias() -= s.fv[f][1].transpose() * cm;
                FA.noalias() += s.fflux[f][1].transpose() * cm;
                FA *= 0.5;
            }
        }
        return out;
    }

    Eigen::VectorXd SliceTables::rhs(const TraceData& data, const PenaltyConfig& cfg) const
    {
        const SpatialMesh& mesh = layout_->mesh();
        const SliceQuadrature& q = *quad_;
        const Side& s = sides_[0];
        const int d = mesh.dim;
        VectorXd r = VectorXd::Zero(layout_->n_dofs());
        for (int e = 0; e < mesh.n_elements(); ++e)
        {
            const int k0 = q.elem_start[e], nq = q.elem_start[e + 1] - k0;
            const double a = mesh.elements[e].a;
            auto re = r.segment(layout_->offset(e), layout_->n_local(e));
            VectorXd tmp(nq);
            for (int k = 0; k < nq; ++k)
                tmp[k] = q.elem_w[k0 + k] * data.ut[k0 + k];
            re.noalias() += s.vt[e] * tmp;
            for (int i = 0; i < d; ++i)
            {
                for (int k = 0; k < nq; ++k)
                    tmp[k] = q.elem_w[k0 + k] * a * data.grad[static_cast<std::size_t>(k0 + k) * d + i];
                re.noalias() += s.g[e][i] * tmp;
            }
        }
        for (int f = 0; f < mesh.n_faces(); ++f)
        {
            const Face& face = mesh.faces[f];
            const int k0 = q.face_start[f], nq = q.face_start[f + 1] - k0;
            const double sigma0 = cfg.C_sigma0 * sigma0_[f];
            const bool interior = face.elements[1] >= 0;
            const double avg = interior ? 0.5 : 1.0;
            VectorXd cv(nq), cf(nq);
            for (int k = 0; k < nq; ++k)
            {
                const double w = q.face_w[k0 + k];
                cv[k] = w * (-data.FA[k0 + k] + sigma0 * data.J[k0 + k]);
                cf[k] = -w * avg * data.J[k0 + k];
            }
            for (int side = 0; side < (interior ? 2 : 1); ++side)
            {
                const int e = face.elements[side];
                const double sign = side == 0 ? 1.0 : -1.0;
                auto re = r.segment(layout_->offset(e), layout_->n_local(e));
                re.noalias() += sign * (s.fv[f][side] * cv);
                re.noalias() += s.fflux[f][side] * cf;
            }
        }
        return r;
    }

    Eigen::VectorXd trace_rhs(const SlabSpace& space, const SliceQuadrature& q, const TraceData& data,
                              const PenaltyConfig& cfg)
    {
        const SpatialMesh& mesh = space.mesh();
        const int d = mesh.dim, p = space.degree();
        const double t = space.t0();
        VectorXd r = VectorXd::Zero(space.n_dofs());
        BasisValues bv;
        for (int e = 0; e < mesh.n_elements(); ++e)
        {
            const double a = mesh.elements[e].a;
            auto re = r.segment(space.offset(e), space.n_local(e));
            for (int k = q.elem_start[e]; k < q.elem_start[e + 1]; ++k)
            {
                space.eval_basis(e, q.elem_x[k], t, bv);
                re += (q.elem_w[k] * data.ut[k]) * bv.vt;
                for (int i = 0; i < d; ++i)
                    re += (q.elem_w[k] * a * data.grad[static_cast<std::size_t>(k) * d + i]) * bv.g[i];
            }
        }
        const double Ca = mesh.a_max();
        for (int f = 0; f < mesh.n_faces(); ++f)
        {
            const Face& face = mesh.faces[f];
            const double sigma0 = penalties(face.h, Ca, p, space.tau(), cfg).sigma0;
            const bool interior = face.elements[1] >= 0;
            const double avg = interior ? 0.5 : 1.0;
            for (int k = q.face_start[f]; k < q.face_start[f + 1]; ++k)
            {
                const double w = q.face_w[k];
                const double cv = w * (-data.FA[k] + sigma0 * data.J[k]);
                const double cf = -w * avg * data.J[k];
                for (int side = 0; side < (interior ? 2 : 1); ++side)
                {
                    const int e = face.elements[side];
                    const double a = mesh.elements[e].a;
                    space.eval_basis(e, q.face_x[k], t, bv);
                    auto re = r.segment(space.offset(e), space.n_local(e));
                    re += ((side == 0 ? 1.0 : -1.0) * cv) * bv.v;
                    for (int i = 0; i < d; ++i)
                        re += (cf * a * face.normal[i]) * bv.g[i];
                }
            }
        }
        return r;
    }

    Eigen::VectorXd assemble_bn(int slab, const SlabSpace& space, const SliceQuadrature& q, const TraceData& previous,
                                const PenaltyConfig& cfg)
    {
        if (slab <= 0)
            throw std::invalid_argument("assemble_bn: slab 0 takes the initial-data functional");
        return trace_rhs(space, q, previous, cfg);
    }

    Eigen::VectorXd assemble_binit(const InitialData& init, const SlabSpace& space, const SliceQuadrature& q,
                                   const PenaltyConfig& cfg)
    {
        const SmoothField field([&init](const Point& x, double) { return init(x); });
        const auto f = field.on_slab(0);
        return trace_rhs(space, q, trace_data(*f, space.mesh(), q, space.t0()), cfg);
    }

    double physical_energy_from_trace(const TraceData& data, const SpatialMesh& mesh, const SliceQuadrature& q)
    {
        const int d = mesh.dim;
        double E = 0.0;
        for (int e = 0; e < mesh.n_elements(); ++e)
        {
            const double a = mesh.elements[e].a;
            for (int k = q.elem_start[e]; k < q.elem_start[e + 1]; ++k)
            {
                double g2 = 0.0;
                for (int i = 0; i < d; ++i)
                {
                    const double g = data.grad[static_cast<std::size_t>(k) * d + i];
                    g2 += g * g;
                }
                E += q.elem_w[k] * 0.5 * (data.ut[k] * data.ut[k] + a * g2);
            }
        }
        return E;
    }

    double energy_from_trace(const TraceData& data, const SpatialMesh& mesh, const SliceQuadrature& q, int p,
                             const PenaltyConfig& cfg)
    {
        double E = physical_energy_from_trace(data, mesh, q);
        for (int f = 0; f < mesh.n_faces(); ++f)
        {
            const double sigma0 = cfg.C_sigma0 * p * p / mesh.faces[f].h;
            for (int k = q.face_start[f]; k < q.face_start[f + 1]; ++k)
                E += q.face_w[k] * (0.5 * sigma0 * data.J[k] * data.J[k] - data.FA[k] * data.J[k]);
        }
        return E;
    }

    double discrete_energy(const SlabFunction& w, const SlabSpace& space, double t, int quad_degree,
                           const PenaltyConfig& cfg)
    {
        const double slack = 1e-12 * std::max(1.0, std::abs(space.t1()));
        if (t < space.t0() - slack || t > space.t1() + slack)
            throw std::invalid_argument("discrete_energy: time outside the slab");
        const SliceQuadrature q(space.mesh(), resolve_degree(space, quad_degree));
        return energy_from_trace(trace_data(w, space.mesh(), q, t), space.mesh(), q, space.degree(), cfg);
    }

    FaceTimeTerms face_time_terms(const SlabFunction& w, const SpatialMesh& mesh, int p, double t0, double t1,
                                  const PenaltyConfig& cfg, int quad_degree)
    {
        const int d = mesh.dim;
        FaceTimeTerms out;
        FieldValue plus, minus;
        const double Ca = mesh.a_max();
        for (int f = 0; f < mesh.n_faces(); ++f)
        {
            const Face& face = mesh.faces[f];
            const bool interior = face.elements[1] >= 0;
            const FacePenalties s = penalties(face.h, Ca, p, t1 - t0, cfg);
            const QuadRule q = face_time_quadrature(mesh, f, t0, t1, quad_degree);
            const double ap = mesh.elements[face.elements[0]].a;
            const double am = interior ? mesh.elements[face.elements[1]].a : 0.0;
            for (int k = 0; k < q.size(); ++k)
            {
                w.eval_face(face, q.x[k], q.t[k], plus, minus);
                double fp = 0.0, fpt = 0.0, fm = 0.0, fmt = 0.0;
                for (int i = 0; i < d; ++i)
                {
                    fp += ap * plus.grad[i] * face.normal[i];
                    fpt += ap * plus.grad_t[i] * face.normal[i];
                    if (interior)
                    {
                        fm += am * minus.grad[i] * face.normal[i];
                        fmt += am * minus.grad_t[i] * face.normal[i];
                    }
                }
                double J, Jt, FAt;
                if (interior)
                {
                    J = plus.u - minus.u;
                    Jt = plus.ut - minus.ut;
                    FAt = 0.5 * (fpt + fmt);
                    const double FJ = fp - fm;
                    const double AVt = 0.5 * (plus.ut + minus.ut);
                    out.sigma2_flux_jump += q.w[k] * s.sigma2 * FJ * FJ;
                    if (s.sigma2 > 0.0)
                        out.avg_ut += q.w[k] * AVt * AVt / s.sigma2;
                }
                else
                {
                    J = plus.u;
                    Jt = plus.ut;
                    FAt = fpt;
                }
                out.sigma1_jump += q.w[k] * s.sigma1 * J * J;
                if (s.sigma1 > 0.0)
                {
                    out.flux_t += q.w[k] * FAt * FAt / s.sigma1;
                    out.jump_t += q.w[k] * s.sigma0 * s.sigma0 * Jt * Jt / s.sigma1;
                }
            }
        }
        return out;
    }

    double dg_norm_sq(const SpaceTimeField& w, const NormContext& ctx)
    {
        const TimePartition& tp = ctx.partition;
        const SliceQuadrature q(ctx.mesh, ctx.quad_degree);
        double total = 0.0;
        TraceData prev_end;
        for (int n = 0; n < tp.n_slabs(); ++n)
        {
            const auto f = w.on_slab(n);
            TraceData start = trace_data(*f, ctx.mesh, q, tp.t(n));
            if (n == 0)
                total += energy_from_trace(start, ctx.mesh, q, ctx.p, ctx.cfg);
            else
            {
                start -= prev_end;
                total += energy_from_trace(start, ctx.mesh, q, ctx.p, ctx.cfg);
            }
            const FaceTimeTerms ft = face_time_terms(*f, ctx.mesh, ctx.p, tp.t(n), tp.t(n + 1), ctx.cfg,
                                                     ctx.quad_degree);
            total += ft.sigma1_jump + ft.sigma2_flux_jump;
            prev_end = trace_data(*f, ctx.mesh, q, tp.t(n + 1));
        }
        total += energy_from_trace(prev_end, ctx.mesh, q, ctx.p, ctx.cfg);
        return total;
    }

    double dgstar_norm_sq(const SpaceTimeField& w, const NormContext& ctx)
    {
        if (!ctx.cfg.sigma1_enabled || !ctx.cfg.sigma2_enabled)
            throw std::invalid_argument("dgstar_norm_sq: needs sigma1 and sigma2 enabled");
        const TimePartition& tp = ctx.partition;
        const SpatialMesh& mesh = ctx.mesh;
        const SliceQuadrature q(mesh, ctx.quad_degree);
        double total = 0.0;
        for (int n = 0; n < tp.n_slabs(); ++n)
        {
            const auto f = w.on_slab(n);
            const TraceData end = trace_data(*f, mesh, q, tp.t(n + 1));
            // 1/2 (|ut|^2 + a|grad|^2 + sigma0 J^2 + sigma0^{-1} FA^2) at t_{n+1}^-
            total += physical_energy_from_trace(end, mesh, q);
            for (int fi = 0; fi < mesh.n_faces(); ++fi)
            {
                const double sigma0 = ctx.cfg.C_sigma0 * ctx.p * ctx.p / mesh.faces[fi].h;
                for (int k = q.face_start[fi]; k < q.face_start[fi + 1]; ++k)
                    total += 0.5 * q.face_w[k] *
                             (sigma0 * end.J[k] * end.J[k] + end.FA[k] * end.FA[k] / sigma0);
            }
            const FaceTimeTerms ft = face_time_terms(*f, mesh, ctx.p, tp.t(n), tp.t(n + 1), ctx.cfg, ctx.quad_degree);
            total += ft.sigma1_jump + ft.sigma2_flux_jump + ft.avg_ut + ft.flux_t + ft.jump_t;
        }
        return total;
    }
} // namespace stdg
