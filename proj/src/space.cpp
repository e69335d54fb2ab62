#include "stdg/space.hpp"

#include <map>
#include <stdexcept>

namespace stdg
{
    SpaceLayout::SpaceLayout(std::shared_ptr<const SpatialMesh> mesh, SpaceConfig cfg, double tau)
        : mesh_(std::move(mesh)), cfg_(cfg), tau_(tau)
    {
        if (!mesh_)
            throw std::invalid_argument("SpaceLayout: null mesh");
        if (cfg_.p < 0)
            throw std::invalid_argument("SpaceLayout: negative degree");
        if (!(tau > 0.0))
            throw std::invalid_argument("SpaceLayout: tau must be positive");

        std::map<double, std::shared_ptr<const ReferenceBasis>> cache;
        std::shared_ptr<const ReferenceBasis> full;
        offsets_.push_back(0);
        for (const auto& el : mesh_->elements)
        {
            std::shared_ptr<const ReferenceBasis> ref;
            if (cfg_.kind == SpaceKind::Trefftz)
            {
                const double sx = 0.5 * el.h, st = 0.5 * tau;
                const double a_tilde = el.a * st * st / (sx * sx);
                auto it = cache.find(a_tilde);
                if (it == cache.end())
                    it = cache.emplace(a_tilde, make_trefftz_reference(cfg_.p, mesh_->dim, a_tilde)).first;
                ref = it->second;
            }
            else
            {
                if (!full)
                    full = make_full_reference(cfg_.p, mesh_->dim);
                ref = full;
            }
            refs_.push_back(ref);
            offsets_.push_back(offsets_.back() + ref->size());
        }
    }

    SlabSpace::SlabSpace(std::shared_ptr<const SpatialMesh> mesh, SpaceConfig cfg, double t0, double t1)
        : SlabSpace(std::make_shared<const SpaceLayout>(std::move(mesh), cfg, t1 - t0), t0, t1)
    {
    }

    SlabSpace::SlabSpace(std::shared_ptr<const SpaceLayout> layout, double t0, double t1)
        : layout_(std::move(layout)), t0_(t0), t1_(t1)
    {
        if (!(t1 > t0))
            throw std::invalid_argument("SlabSpace: empty time interval");
    }

    ElementFrame SlabSpace::frame(int elem) const
    {
        const auto& el = mesh().elements[elem];
        return ElementFrame::make(mesh().dim, std::span<const double>(el.centroid.data(), mesh().dim), 0.5 * el.h,
                                  0.5 * (t0_ + t1_), 0.5 * layout_->tau());
    }

    LocalBasis SlabSpace::local_basis(int elem) const
    {
        LocalBasis lb;
        lb.frame = frame(elem);
        lb.ref = layout_->reference_ptr(elem);
        lb.a_K = mesh().elements[elem].a;
        return lb;
    }

    std::array<double, kMaxVars> SlabSpace::to_local(int elem, const Point& x, double t) const
    {
        const auto& el = mesh().elements[elem];
        const int d = mesh().dim;
        const double sx = 0.5 * el.h, st = 0.5 * layout_->tau();
        std::array<double, kMaxVars> y{};
        for (int i = 0; i < d; ++i)
            y[i] = (x[i] - el.centroid[i]) / sx;
        y[d] = (t - 0.5 * (t0_ + t1_)) / st;
        return y;
    }

    void SlabSpace::eval_basis(int elem, const Point& x, double t, BasisValues& out) const
    {
        const ReferenceBasis& ref = layout_->reference(elem);
        const int d = mesh().dim;
        const auto y = to_local(elem, x, t);
        ref.monomial_values(std::span<const double>(y.data(), d + 1), out.mono);
        const double sx = 0.5 * mesh().elements[elem].h, st = 0.5 * layout_->tau();
        out.v.noalias() = ref.coeffs * out.mono;
        out.vt.noalias() = (ref.coeffs_t * out.mono) / st;
        out.vtt.noalias() = (ref.coeffs_tt * out.mono) / (st * st);
        for (int i = 0; i < d; ++i)
        {
            out.g[i].noalias() = (ref.coeffs_x[i] * out.mono) / sx;
            out.gt[i].noalias() = (ref.coeffs_xt[i] * out.mono) / (sx * st);
        }
    }

    FieldValue SlabSpace::evaluate(int elem, std::span<const double> coeffs, const Point& x, double t) const
    {
        if (static_cast<int>(coeffs.size()) != n_dofs())
            throw std::invalid_argument("SlabSpace::evaluate: coefficient vector has wrong length");
        BasisValues bv;
        eval_basis(elem, x, t, bv);
        Eigen::Map<const Eigen::VectorXd> c(coeffs.data() + offset(elem), n_local(elem));
        FieldValue f;
        f.u = bv.v.dot(c);
        f.ut = bv.vt.dot(c);
        f.utt = bv.vtt.dot(c);
        for (int i = 0; i < mesh().dim; ++i)
        {
            f.grad[i] = bv.g[i].dot(c);
            f.grad_t[i] = bv.gt[i].dot(c);
        }
        return f;
    }

    void SlabFunction::eval_face(const Face& face, const Point& x, double t, FieldValue& plus, FieldValue& minus) const
    {
        plus = eval(face.elements[0], x, t);
        if (face.elements[1] >= 0)
            minus = eval(face.elements[1], x, t);
    }

    DiscreteSlabFunction::DiscreteSlabFunction(const SlabSpace& space, std::span<const double> coeffs) : space_(space)
    {
        if (static_cast<int>(coeffs.size()) != space.n_dofs())
            throw std::invalid_argument("DiscreteSlabFunction: coefficient vector has wrong length");
        const auto& mesh = space.mesh();
        const int d = mesh.dim;
        const int blocks = 3 + 2 * d;
        start_.resize(mesh.n_elements() + 1);
        start_[0] = 0;
        for (int e = 0; e < mesh.n_elements(); ++e)
            start_[e + 1] = start_[e] + static_cast<std::size_t>(blocks * space.layout().reference(e).n_monomials());
        data_.resize(start_.back());

        const double st = 0.5 * space.layout().tau();
        for (int e = 0; e < mesh.n_elements(); ++e)
        {
            const ReferenceBasis& ref = space.layout().reference(e);
            const int nm = ref.n_monomials();
            const double sx = 0.5 * mesh.elements[e].h;
            Eigen::Map<const Eigen::VectorXd> c(coeffs.data() + space.offset(e), space.n_local(e));
            double* out = data_.data() + start_[e];
            auto put = [&](int block, const Eigen::MatrixXd& table, double factor) {
                Eigen::Map<Eigen::VectorXd>(out + block * nm, nm).noalias() = factor * (table.transpose() * c);
            };
            put(0, ref.coeffs, 1.0);
            put(1, ref.coeffs_t, 1.0 / st);
            put(2, ref.coeffs_tt, 1.0 / (st * st));
            for (int i = 0; i < d; ++i)
            {
                put(3 + i, ref.coeffs_x[i], 1.0 / sx);
                put(3 + d + i, ref.coeffs_xt[i], 1.0 / (sx * st));
            }
        }
    }

    FieldValue DiscreteSlabFunction::eval(int elem, const Point& x, double t) const
    {
        const ReferenceBasis& ref = space_.layout().reference(elem);
        const int d = space_.mesh().dim;
        const int nm = ref.n_monomials();
        const auto y = space_.to_local(elem, x, t);
        thread_local Eigen::VectorXd mono;
        ref.monomial_values(std::span<const double>(y.data(), d + 1), mono);
        const double* base = data_.data() + start_[elem];
        auto dot = [&](int block) { return Eigen::Map<const Eigen::VectorXd>(base + block * nm, nm).dot(mono); };
        FieldValue f;
        f.u = dot(0);
        f.ut = dot(1);
        f.utt = dot(2);
        for (int i = 0; i < d; ++i)
        {
            f.grad[i] = dot(3 + i);
            f.grad_t[i] = dot(3 + d + i);
        }
        return f;
    }

    namespace
    {
        class SmoothSlabFunction final : public SlabFunction
        {
        public:
            explicit SmoothSlabFunction(const SmoothField::Evaluator& f) : f_(f) {}
            FieldValue eval(int, const Point& x, double t) const override { return f_(x, t); }
            void eval_face(const Face& face, const Point& x, double t, FieldValue& plus,
                           FieldValue& minus) const override
            {
                plus = f_(x, t);
                if (face.elements[1] >= 0)
                    minus = plus;
            }

        private:
            const SmoothField::Evaluator& f_;
        };

        class DifferenceSlabFunction final : public SlabFunction
        {
        public:
            DifferenceSlabFunction(std::unique_ptr<SlabFunction> a, std::unique_ptr<SlabFunction> b)
                : a_(std::move(a)), b_(std::move(b))
            {
            }
            FieldValue eval(int elem, const Point& x, double t) const override
            {
                return a_->eval(elem, x, t) - b_->eval(elem, x, t);
            }
            void eval_face(const Face& face, const Point& x, double t, FieldValue& plus,
                           FieldValue& minus) const override
            {
                FieldValue ap, am, bp, bm;
                a_->eval_face(face, x, t, ap, am);
                b_->eval_face(face, x, t, bp, bm);
                plus = ap - bp;
                if (face.elements[1] >= 0)
                    minus = am - bm;
            }

        private:
            std::unique_ptr<SlabFunction> a_, b_;
        };
    } // namespace

    std::unique_ptr<SlabFunction> SmoothField::on_slab(int) const
    {
        return std::make_unique<SmoothSlabFunction>(f_);
    }

    std::unique_ptr<SlabFunction> DifferenceField::on_slab(int slab) const
    {
        return std::make_unique<DifferenceSlabFunction>(a_.on_slab(slab), b_.on_slab(slab));
    }

    FieldValue operator-(const FieldValue& a, const FieldValue& b)
    {
        FieldValue r;
        r.u = a.u - b.u;
        r.ut = a.ut - b.ut;
        r.utt = a.utt - b.utt;
        for (int i = 0; i < 3; ++i)
        {
            r.grad[i] = a.grad[i] - b.grad[i];
            r.grad_t[i] = a.grad_t[i] - b.grad_t[i];
        }
        return r;
    }
} // namespace stdg
