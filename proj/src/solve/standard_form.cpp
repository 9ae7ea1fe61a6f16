#include "solve/standard_form.hpp"

#include <stdexcept>
#include <vector>

namespace fcas {

StandardForm to_standard_form(const ConicProgram& p, const std::vector<double>* lb,
                              const std::vector<double>* ub) {
    if (p.n_binaries() > 0)
        throw std::invalid_argument("to_standard_form: program has binary variables");
    StandardForm sf;
    sf.n = p.n_vars();
    sf.obj_sign = p.sense == Sense::Maximize ? -1.0 : 1.0;
    sf.obj_constant = p.obj_constant;
    sf.c.resize(sf.n);
    for (int j = 0; j < sf.n; ++j) sf.c[j] = sf.obj_sign * p.vars[j].obj;

    std::vector<Eigen::Triplet<double>> ta, tg;
    std::vector<double> bv, hv;
    sf.row_refs.resize(p.rows.size());
    for (size_t i = 0; i < p.rows.size(); ++i) {
        const auto& r = p.rows[i];
        if (r.sense == RowSense::EQ) {
            int row = static_cast<int>(bv.size());
            for (const auto& t : r.terms) ta.emplace_back(row, t.var, t.coef);
            bv.push_back(r.rhs);
            sf.row_refs[i] = {true, row};
        } else {
            double sgn = r.sense == RowSense::LE ? 1.0 : -1.0;
            int row = static_cast<int>(hv.size());
            for (const auto& t : r.terms) tg.emplace_back(row, t.var, sgn * t.coef);
            hv.push_back(sgn * r.rhs);
            sf.row_refs[i] = {false, row};
        }
    }
    sf.lb_slot.assign(sf.n, -1);
    sf.ub_slot.assign(sf.n, -1);
    for (int j = 0; j < sf.n; ++j) {
        double l = lb ? (*lb)[j] : p.vars[j].lb;
        double u = ub ? (*ub)[j] : p.vars[j].ub;
        if (l > -kInf) {
            sf.lb_slot[j] = static_cast<int>(hv.size());
            tg.emplace_back(static_cast<int>(hv.size()), j, -1.0);
            hv.push_back(-l);
        }
        if (u < kInf) {
            sf.ub_slot[j] = static_cast<int>(hv.size());
            tg.emplace_back(static_cast<int>(hv.size()), j, 1.0);
            hv.push_back(u);
        }
    }
    sf.n_lp = static_cast<int>(hv.size());
    for (const auto& c : p.cones) {
        sf.cone_start.push_back(static_cast<int>(hv.size()));
        sf.soc_dims.push_back(static_cast<int>(c.u.size()) + 1);
        int row = static_cast<int>(hv.size());
        for (const auto& t : c.w.terms) tg.emplace_back(row, t.var, -t.coef);
        hv.push_back(c.w.constant);
        for (const auto& e : c.u) {
            row = static_cast<int>(hv.size());
            for (const auto& t : e.terms) tg.emplace_back(row, t.var, -t.coef);
            hv.push_back(e.constant);
        }
    }

    sf.A.resize(static_cast<int>(bv.size()), sf.n);
    sf.A.setFromTriplets(ta.begin(), ta.end());
    sf.A.makeCompressed();
    sf.G.resize(static_cast<int>(hv.size()), sf.n);
    sf.G.setFromTriplets(tg.begin(), tg.end());
    sf.G.makeCompressed();
    sf.b = Eigen::Map<Eigen::VectorXd>(bv.data(), static_cast<int>(bv.size()));
    sf.h = Eigen::Map<Eigen::VectorXd>(hv.data(), static_cast<int>(hv.size()));
    return sf;
}

void update_bound_values(StandardForm& sf, const std::vector<double>& lb,
                         const std::vector<double>& ub) {
    for (int j = 0; j < sf.n; ++j) {
        if (sf.lb_slot[j] >= 0) {
            if (!(lb[j] > -kInf)) throw std::logic_error("bound update would drop a lower bound");
            sf.h[sf.lb_slot[j]] = -lb[j];
        } else if (lb[j] > -kInf) {
            throw std::logic_error("bound update adds a lower bound with no slot");
        }
        if (sf.ub_slot[j] >= 0) {
            if (!(ub[j] < kInf)) throw std::logic_error("bound update would drop an upper bound");
            sf.h[sf.ub_slot[j]] = ub[j];
        } else if (ub[j] < kInf) {
            throw std::logic_error("bound update adds an upper bound with no slot");
        }
    }
}

void recover_duals(const ConicProgram& p, const StandardForm& sf,
                   const Eigen::VectorXd& y, const Eigen::VectorXd& z, Solution& out) {
    out.row_duals.assign(p.rows.size(), 0.0);
    for (size_t i = 0; i < p.rows.size(); ++i) {
        const auto& ref = sf.row_refs[i];
        out.row_duals[i] = ref.eq ? -y[ref.idx] : z[ref.idx];
    }
    out.lb_duals.assign(sf.n, 0.0);
    out.ub_duals.assign(sf.n, 0.0);
    for (int j = 0; j < sf.n; ++j) {
        if (sf.lb_slot[j] >= 0) out.lb_duals[j] = z[sf.lb_slot[j]];
        if (sf.ub_slot[j] >= 0) out.ub_duals[j] = z[sf.ub_slot[j]];
    }
    out.cone_duals.clear();
    for (size_t k = 0; k < p.cones.size(); ++k) {
        int start = sf.cone_start[k];
        int dim = sf.soc_dims[k];
        std::vector<double> d(dim);
        for (int i = 1; i < dim; ++i) d[i - 1] = z[start + i];  // omega_u
        d[dim - 1] = z[start];                                  // omega_w
        out.cone_duals.push_back(std::move(d));
    }
    out.has_duals = true;
}

}  // namespace fcas
