// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Matrix-free evaluation of the finite-strain residual and its directional
// derivative on one FE level, in material or spatial form, with the three
// per-quadrature-point storage strategies. Elements are processed in lanes
// of a fixed-width batch; the element loop is partitioned into parity
// colors so no two concurrently processed elements share a node.

#ifndef ELASTMF_OPERATOR_HPP
#define ELASTMF_OPERATOR_HPP

#include <functional>
#include <thread>
#include <vector>

#include "elastmf/constitutive.hpp"
#include "elastmf/mesh.hpp"

namespace emf {

struct Loads {
  // Uniform pressure on a material face (traction -p N on the deformed-cube
  // reference geometry).
  double pressure = 0.0;
  int pressure_face = 1;  // -x,+x,-y,+y,-z,+z = 0..5
  std::function<Vec3d(const Vec3d&)> body_force;
  // General tractions: h(X, N) applied on the faces flagged below.
  std::array<bool, 6> traction_faces{};
  std::function<Vec3d(const Vec3d&, const Vec3d&)> traction;
};

/// Per-quadrature-point byte accounting scaled to a whole level.
struct ByteLedger {
  CellLedger cell;
  std::int64_t n_qpoints = 0;
  std::int64_t n_dofs = 0;

  std::int64_t storage_total() const { return n_qpoints * cell.storage_bytes(); }
  std::int64_t traffic_total() const { return n_qpoints * cell.traffic_bytes(); }
  /// Analytic bytes per DoF of one linearized operator application:
  /// quadrature-point traffic plus reading the input and writing the output.
  double traffic_per_dof() const {
    return static_cast<double>(traffic_total()) / n_dofs + 16.0;
  }
};

template <typename Number>
class ElasticOperator {
public:
  static constexpr int W = natural_width<Number>;
  using B = Batch<Number, W>;

  ElasticOperator(const FeLevel& level, ModelKind model,
                  const MaterialParams& params, Formulation form,
                  Strategy strategy, const KernelConfig& cfg = {},
                  const Loads& loads = {})
    : level_(&level),
      model_(model),
      params_(params),
      st_(build_structure_tensors(params)),
      form_(form),
      strategy_(strategy),
      cfg_(cfg),
      loads_(loads) {
    params_.validate(model);
    build_colors();
    build_load_vector();
  }

  const FeLevel& level() const { return *level_; }
  ModelKind model() const { return model_; }
  Formulation formulation() const { return form_; }
  Strategy strategy() const { return strategy_; }
  const StructureTensors& structure_tensors() const { return st_; }
  void set_threads(int t) { threads_ = t < 1 ? 1 : t; }

  /// Scales the fixed load vector (drivers ramp loads in increments).
  void set_load_scale(double s) { load_scale_ = Number(s); }

  std::int64_t n_dofs() const { return level_->dof_count(); }

  /// Recomputes the per-point linearization data for the stored strategy
  /// at the iterate u_k (always handed over in double precision; stored
  /// fields are converted to the operator's number type on store).
  void update_linearization(const std::vector<double>& u_k);

  bool linearized() const { return linearized_; }
  std::uint64_t checksum() const { return checksum_; }

  /// r_i = (Grad v_i, F S) - loads (material) or the algebraically
  /// equivalent spatial form; Dirichlet entries are zeroed.
  void evaluate_residual(const std::vector<Number>& u,
                         std::vector<Number>& r) const;

  /// y = K du at the stored linearization point; Dirichlet rows and
  /// columns act as the identity.
  void apply_tangent(const std::vector<Number>& du,
                     std::vector<Number>& y) const;

  /// Exact diagonal of K through element-local applications to unit
  /// element vectors. Entries on constrained rows are exactly 1. If a
  /// nonpositive entry shows up on a free row, its index is recorded in
  /// the second member instead of throwing.
  std::pair<std::vector<Number>, std::vector<std::int64_t>> compute_diagonal()
      const;

  ByteLedger byte_ledger() const {
    ByteLedger bl;
    bl.cell = cell_ledger(model_, form_.domain, strategy_);
    bl.n_qpoints = level_->mesh().element_count() *
                   level_->n_qpoints_per_element();
    bl.n_dofs = n_dofs();
    return bl;
  }

private:
  // ---- construction-time data
  const FeLevel* level_;
  ModelKind model_;
  MaterialParams params_;
  StructureTensors st_;
  Formulation form_;
  Strategy strategy_;
  KernelConfig cfg_;
  Loads loads_;
  int threads_ = 1;
  std::vector<std::vector<std::int64_t>> colors_;  // 8 parity classes
  std::vector<Number> load_vector_;
  Number load_scale_ = Number(1);

  // ---- linearization state
  bool linearized_ = false;
  std::uint64_t checksum_ = 0;
  std::vector<double> u_k_;
  std::vector<Number> u_k_num_;
  struct Fields {
    std::vector<Number> jm1, jp, lnj, invj, c1, c2, c3[2], istar[2], efib[2];
    std::vector<Number> F, S, Finv, Cinv;    // material tensors
    std::vector<Number> tau, b, fh[2];       // spatial tensors
    std::vector<Number> jt;                  // spatial mapping (9 per qp)
  } f_;

  void build_colors() {
    colors_.assign(8, {});
    const int n = level_->mesh().n();
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          colors_[(i & 1) + 2 * (j & 1) + 4 * (k & 1)].push_back(
              level_->element_index(i, j, k));
  }

  void build_load_vector();

  static std::uint64_t fnv1a(const void* data, std::size_t bytes) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
    return h;
  }

  // ---- batched element kernels (definitions below)
  struct Scratch;
  void element_gather(const std::vector<Number>& global,
                      const std::int64_t* elems, int count,
                      std::vector<B> local[3]) const;
  void element_scatter_add(const std::vector<B> local[3],
                           const std::int64_t* elems, int count,
                           std::vector<Number>& global) const;
  void gradients_of(const std::vector<B> local[3], Scratch& s,
                    std::vector<B> grad[3][3]) const;

  void qp_mapping(const std::int64_t* elems, int count, int q, Tensor2<B>& j0,
                  B& det0) const;
  Tensor2<B> qp_ref_gradient(const std::vector<B> grad[3][3], int q) const;

  QpCache<B> qp_cache_for_apply(const std::int64_t* elems, int count, int q,
                                const Tensor2<B>* gk) const;
  void load_scalar_fields(QpCache<B>& c, const std::int64_t* elems, int count,
                          int q) const;
  void load_tensor_fields(QpCache<B>& c, const std::int64_t* elems, int count,
                          int q) const;
  Tensor2<B> load_jt(const std::int64_t* elems, int count, int q) const;
  B load_field(const std::vector<Number>& v, const std::int64_t* elems,
               int count, int q) const;

  void process_elements_tangent(const std::vector<Number>& du,
                                std::vector<Number>& y) const;
  void process_elements_residual(const std::vector<Number>& u,
                                 std::vector<Number>& r) const;
  void element_tangent_batch(const std::int64_t* elems, int count,
                             const std::vector<Number>& input,
                             std::vector<Number>& output, Scratch& s) const;
  void element_residual_batch(const std::int64_t* elems, int count,
                              const std::vector<Number>& input,
                              std::vector<Number>& output, Scratch& s) const;
  template <typename Fn>
  void parallel_over_colors(Fn&& fn) const;
};

// ===== implementation ======================================================

template <typename Number>
struct ElasticOperator<Number>::Scratch {
  std::vector<B> local_in[3], local_out[3];
  std::vector<B> grad[3][3];
  std::vector<B> grad_uk[3][3];
  std::vector<B> work;
  std::vector<B> local_uk[3];
  std::vector<QpCache<B>> bundles;
  std::vector<Tensor2<B>> jts;
  std::vector<B> det0w;
  std::vector<Tensor2<B>> j0inv;

  void init(int nn3, int nq3, int mx3) {
    if (static_cast<int>(local_in[0].size()) == nn3 &&
        static_cast<int>(grad[0][0].size()) == nq3)
      return;  // buffers are overwritten by the kernels, no zeroing needed
    for (int c = 0; c < 3; ++c) {
      local_in[c].assign(nn3, B(Number(0)));
      local_out[c].assign(nn3, B(Number(0)));
      local_uk[c].assign(nn3, B(Number(0)));
      for (int d = 0; d < 3; ++d) {
        grad[c][d].assign(nq3, B(Number(0)));
        grad_uk[c][d].assign(nq3, B(Number(0)));
      }
    }
    work.assign(2 * static_cast<std::size_t>(mx3), B(Number(0)));
  }
};

template <typename Number>
void ElasticOperator<Number>::element_gather(const std::vector<Number>& global,
                                             const std::int64_t* elems,
                                             int count,
                                             std::vector<B> local[3]) const {
  const int nn = level_->basis().nn();
  const int nn3 = nn * nn * nn;
  std::vector<std::int64_t> nodes(nn3);
  const int n = level_->mesh().n();
  for (int l = 0; l < W; ++l) {
    const std::int64_t e = elems[l < count ? l : count - 1];
    const int i = static_cast<int>(e % n);
    const int j = static_cast<int>((e / n) % n);
    const int k = static_cast<int>(e / (static_cast<std::int64_t>(n) * n));
    level_->element_nodes(i, j, k, nodes.data());
    for (int c = 0; c < 3; ++c)
      for (int m = 0; m < nn3; ++m)
        local[c][m].lane[l] = global[3 * nodes[m] + c];
  }
}

template <typename Number>
void ElasticOperator<Number>::element_scatter_add(
    const std::vector<B> local[3], const std::int64_t* elems, int count,
    std::vector<Number>& global) const {
  const int nn = level_->basis().nn();
  const int nn3 = nn * nn * nn;
  std::vector<std::int64_t> nodes(nn3);
  const int n = level_->mesh().n();
  for (int l = 0; l < count; ++l) {  // padded lanes are masked out here
    const std::int64_t e = elems[l];
    const int i = static_cast<int>(e % n);
    const int j = static_cast<int>((e / n) % n);
    const int k = static_cast<int>(e / (static_cast<std::int64_t>(n) * n));
    level_->element_nodes(i, j, k, nodes.data());
    for (int c = 0; c < 3; ++c)
      for (int m = 0; m < nn3; ++m)
        global[3 * nodes[m] + c] += local[c][m].lane[l];
  }
}

template <typename Number>
void ElasticOperator<Number>::gradients_of(const std::vector<B> local[3],
                                           Scratch& s,
                                           std::vector<B> grad[3][3]) const {
  const Basis1D& b1 = level_->basis();
  for (int c = 0; c < 3; ++c)
    gradient_at_qpoints(b1.B.data(), b1.D.data(), b1.nn(), b1.nq(),
                        local[c].data(), s.work.data(), grad[c][0].data(),
                        grad[c][1].data(), grad[c][2].data());
}

template <typename Number>
void ElasticOperator<Number>::qp_mapping(const std::int64_t* elems, int count,
                                         int q, Tensor2<B>& j0,
                                         B& det0) const {
  const int nq3 = level_->n_qpoints_per_element();
  const std::vector<double>& jac = level_->jacobians();
  for (int l = 0; l < W; ++l) {
    const std::int64_t e = elems[l < count ? l : count - 1];
    const double* J = &jac[(e * nq3 + q) * 9];
    for (int m = 0; m < 9; ++m) j0.a[m].lane[l] = Number(J[m]);
  }
  det0 = determinant(j0);
}

template <typename Number>
Tensor2<typename ElasticOperator<Number>::B>
ElasticOperator<Number>::qp_ref_gradient(const std::vector<B> grad[3][3],
                                         int q) const {
  Tensor2<B> g;
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) g(c, d) = grad[c][d][q];
  return g;
}

template <typename Number>
typename ElasticOperator<Number>::B ElasticOperator<Number>::load_field(
    const std::vector<Number>& v, const std::int64_t* elems, int count,
    int q) const {
  const int nq3 = level_->n_qpoints_per_element();
  B r;
  for (int l = 0; l < W; ++l) {
    const std::int64_t e = elems[l < count ? l : count - 1];
    r.lane[l] = v[e * nq3 + q];
  }
  return r;
}

template <typename Number>
void ElasticOperator<Number>::load_scalar_fields(QpCache<B>& c,
                                                 const std::int64_t* elems,
                                                 int count, int q) const {
  c.lnj = load_field(f_.lnj, elems, count, q);
  if (model_ != ModelKind::cnh) {
    c.jm1 = load_field(f_.jm1, elems, count, q);
    c.jp = load_field(f_.jp, elems, count, q);
    c.c1 = load_field(f_.c1, elems, count, q);
    c.c2 = load_field(f_.c2, elems, count, q);
  }
  if (model_ == ModelKind::fiber)
    for (int i = 0; i < 2; ++i) {
      c.c3[i] = load_field(f_.c3[i], elems, count, q);
      c.istar[i] = load_field(f_.istar[i], elems, count, q);
      c.efib[i] = load_field(f_.efib[i], elems, count, q);
    }
}

template <typename Number>
void ElasticOperator<Number>::load_tensor_fields(QpCache<B>& c,
                                                 const std::int64_t* elems,
                                                 int count, int q) const {
  const int nq3 = level_->n_qpoints_per_element();
  auto load9 = [&](const std::vector<Number>& v, Tensor2<B>& t) {
    for (int l = 0; l < W; ++l) {
      const std::int64_t e = elems[l < count ? l : count - 1];
      for (int m = 0; m < 9; ++m) t.a[m].lane[l] = v[(e * nq3 + q) * 9 + m];
    }
  };
  auto load6 = [&](const std::vector<Number>& v, SymTensor2<B>& t) {
    for (int l = 0; l < W; ++l) {
      const std::int64_t e = elems[l < count ? l : count - 1];
      for (int m = 0; m < 6; ++m) t.s[m].lane[l] = v[(e * nq3 + q) * 6 + m];
    }
  };
  if (form_.domain == Domain::material) {
    load9(f_.F, c.F);
    load6(f_.S, c.S);
    load9(f_.Finv, c.Finv);
    load6(f_.Cinv, c.Cinv);
  } else {
    load6(f_.tau, c.tau);
    if (model_ != ModelKind::cnh) load6(f_.b, c.b);
    if (model_ == ModelKind::fiber)
      for (int i = 0; i < 2; ++i) load6(f_.fh[i], c.fh[i]);
  }
}

template <typename Number>
Tensor2<typename ElasticOperator<Number>::B> ElasticOperator<Number>::load_jt(
    const std::int64_t* elems, int count, int q) const {
  const int nq3 = level_->n_qpoints_per_element();
  Tensor2<B> t;
  for (int l = 0; l < W; ++l) {
    const std::int64_t e = elems[l < count ? l : count - 1];
    for (int m = 0; m < 9; ++m) t.a[m].lane[l] = f_.jt[(e * nq3 + q) * 9 + m];
  }
  return t;
}

/// Assembles the per-point linearization bundle for the active strategy:
/// "tensor" loads everything, "scalar" loads the scalars and recomputes the
/// tensors from the iterate's displacement gradient, "none" recomputes all.
template <typename Number>
QpCache<typename ElasticOperator<Number>::B>
ElasticOperator<Number>::qp_cache_for_apply(const std::int64_t* elems,
                                            int count, int q,
                                            const Tensor2<B>* gk) const {
  QpCache<B> c;
  c.model = model_;
  c.domain = form_.domain;
  c.strategy = strategy_;
  c.stability = form_.stability;
  if (strategy_ == Strategy::tensor) {
    load_scalar_fields(c, elems, count, q);
    load_tensor_fields(c, elems, count, q);
    return c;
  }
  if (strategy_ == Strategy::none) {
    QpCache<B> full = compute_cache(model_, params_, st_, *gk, strategy_,
                                    form_.domain, cfg_, form_.stability);
    return full;
  }
  // scalar strategy: strain-dependent tensors from G_k, scalars from store
  const StrainData<B> s = make_strain(*gk, form_.stability);
  load_scalar_fields(c, elems, count, q);
  c.F = s.F;
  c.Finv = s.Finv;
  c.Cinv = s.Cinv;
  if (form_.domain == Domain::material) {
    c.S = detail::second_pk_base(model_, params_, s, c.lnj, c.jp);
    if (model_ == ModelKind::fiber)
      for (int i = 0; i < 2; ++i)
        c.S += (c.c3[i] * c.efib[i]) * detail::structure_tensor_as<B>(st_, i);
  } else {
    c.b = B(Number(2)) * s.bt;
    c.b.s[0] += B(Number(1));
    c.b.s[1] += B(Number(1));
    c.b.s[2] += B(Number(1));
    c.tau = detail::kirchhoff_base(model_, params_, s, c.lnj, c.jp);
    if (model_ == ModelKind::fiber)
      for (int i = 0; i < 2; ++i) {
        c.fh[i] = push_forward(s.F, detail::structure_tensor_as<B>(st_, i));
        c.tau += (c.c3[i] * c.efib[i]) * c.fh[i];
      }
  }
  return c;
}

template <typename Number>
template <typename Fn>
void ElasticOperator<Number>::parallel_over_colors(Fn&& fn) const {
  for (const auto& color : colors_) {
    const std::int64_t nbatches =
        (static_cast<std::int64_t>(color.size()) + W - 1) / W;
    if (threads_ <= 1 || nbatches < 2 * threads_) {
      for (std::int64_t b = 0; b < nbatches; ++b) {
        const int count =
            static_cast<int>(std::min<std::int64_t>(W, color.size() - b * W));
        fn(color.data() + b * W, count);
      }
    } else {
      std::vector<std::thread> pool;
      const std::int64_t chunk = (nbatches + threads_ - 1) / threads_;
      for (int t = 0; t < threads_; ++t) {
        const std::int64_t b0 = t * chunk;
        const std::int64_t b1 = std::min(nbatches, b0 + chunk);
        if (b0 >= b1) break;
        pool.emplace_back([&, b0, b1] {
          for (std::int64_t b = b0; b < b1; ++b) {
            const int count = static_cast<int>(
                std::min<std::int64_t>(W, color.size() - b * W));
            fn(color.data() + b * W, count);
          }
        });
      }
      for (auto& th : pool) th.join();
    }
  }
}

template <typename Number>
void ElasticOperator<Number>::element_tangent_batch(
    const std::int64_t* elems, int count, const std::vector<Number>& input,
    std::vector<Number>& output, Scratch& s) const {
  const Basis1D& b1 = level_->basis();
  const int nn = b1.nn(), nq = b1.nq();
  const int nn3 = nn * nn * nn, nq3 = nq * nq * nq;
  const bool material = form_.domain == Domain::material;
  const bool need_uk = strategy_ != Strategy::tensor;

  element_gather(input, elems, count, s.local_in);
  gradients_of(s.local_in, s, s.grad);
  if (need_uk) {
    element_gather(u_k_num_, elems, count, s.local_uk);
    gradients_of(s.local_uk, s, s.grad_uk);
  }

  for (int c = 0; c < 3; ++c)
    for (int m = 0; m < nn3; ++m) s.local_out[c][m] = B(Number(0));

  for (int q = 0; q < nq3; ++q) {
    Tensor2<B> j0;
    B det0;
    const int qa = q % nq, qb = (q / nq) % nq, qc = q / (nq * nq);
    const Number wq = Number(b1.qwts[qa] * b1.qwts[qb] * b1.qwts[qc]);
    Tensor2<B> w_ref;  // integrand contracted against Grad_xi of the tests

    if (material) {
      qp_mapping(elems, count, q, j0, det0);
      const Tensor2<B> j0inv = inverse(j0);
      const Tensor2<B> dg = matmul(qp_ref_gradient(s.grad, q), j0inv);
      Tensor2<B> gk;
      if (need_uk) gk = matmul(qp_ref_gradient(s.grad_uk, q), j0inv);
      const QpCache<B> cache = qp_cache_for_apply(elems, count, q, &gk);
      const SymTensor2<B> ds = tangent_material(params_, st_, cache, dg);
      const Tensor2<B> w_mat = matmul(dg, cache.S) + matmul(cache.F, ds);
      w_ref = (det0 * B(wq)) * matmul(w_mat, transpose(j0inv));
    } else {
      const Tensor2<B> jt = load_jt(elems, count, q);
      const Tensor2<B> jtinv = inverse(jt);
      const B detjt = determinant(jt);
      const B invj = load_field(f_.invj, elems, count, q);
      const Tensor2<B> dgrad = matmul(qp_ref_gradient(s.grad, q), jtinv);
      Tensor2<B> gk;
      if (need_uk) {
        qp_mapping(elems, count, q, j0, det0);
        gk = matmul(qp_ref_gradient(s.grad_uk, q), inverse(j0));
      }
      const QpCache<B> cache = qp_cache_for_apply(elems, count, q, &gk);
      const Tensor2<B> w_sp = tangent_spatial(params_, st_, cache, dgrad);
      w_ref = (invj * detjt * B(wq)) * matmul(w_sp, transpose(jtinv));
    }
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) s.grad[c][d][q] = w_ref(c, d);
  }

  for (int c = 0; c < 3; ++c)
    scatter_gradient_to_nodes(b1.Bt.data(), b1.Dt.data(), nn, nq,
                              s.grad[c][0].data(), s.grad[c][1].data(),
                              s.grad[c][2].data(), s.work.data(),
                              s.local_out[c].data());
  element_scatter_add(s.local_out, elems, count, output);
}

template <typename Number>
void ElasticOperator<Number>::element_residual_batch(
    const std::int64_t* elems, int count, const std::vector<Number>& input,
    std::vector<Number>& output, Scratch& s) const {
  const Basis1D& b1 = level_->basis();
  const int nn = b1.nn(), nq = b1.nq();
  const int nn3 = nn * nn * nn, nq3 = nq * nq * nq;
  const bool material = form_.domain == Domain::material;

  element_gather(input, elems, count, s.local_in);
  gradients_of(s.local_in, s, s.grad);
  for (int c = 0; c < 3; ++c)
    for (int m = 0; m < nn3; ++m) s.local_out[c][m] = B(Number(0));

  for (int q = 0; q < nq3; ++q) {
    Tensor2<B> j0;
    B det0;
    qp_mapping(elems, count, q, j0, det0);
    const Tensor2<B> j0inv = inverse(j0);
    const Tensor2<B> gref = qp_ref_gradient(s.grad, q);
    const Tensor2<B> g = matmul(gref, j0inv);
    const int qa = q % nq, qb = (q / nq) % nq, qc = q / (nq * nq);
    const Number wq = Number(b1.qwts[qa] * b1.qwts[qb] * b1.qwts[qc]);
    Tensor2<B> w_ref;

    const StrainData<B> strain = make_strain(g, form_.stability);
    const B lnj = detail::ln_of(strain, cfg_);
    const B jp =
        model_ == ModelKind::cnh ? B(Number(1)) : jpow(strain.jm1, cfg_);
    if (material) {
      SymTensor2<B> S = detail::second_pk_base(model_, params_, strain, lnj, jp);
      if (model_ == ModelKind::fiber) {
        const auto fi = detail::fiber_invariants(strain, params_, st_, cfg_);
        for (int i = 0; i < 2; ++i)
          S += (fi.c3[i] * fi.efib[i]) * detail::structure_tensor_as<B>(st_, i);
      }
      const Tensor2<B> w_mat = matmul(strain.F, S);
      w_ref = (det0 * B(wq)) * matmul(w_mat, transpose(j0inv));
    } else {
      SymTensor2<B> tau = detail::kirchhoff_base(model_, params_, strain, lnj, jp);
      if (model_ == ModelKind::fiber) {
        const auto fi = detail::fiber_invariants(strain, params_, st_, cfg_);
        for (int i = 0; i < 2; ++i)
          tau += (fi.c3[i] * fi.efib[i]) *
                 push_forward(strain.F, detail::structure_tensor_as<B>(st_, i));
      }
      // J_t = J0 + Grad_xi(u); det J_t = J det J0; grad v = Grad_xi v Jt^-1
      const Tensor2<B> jt = j0 + gref;
      const Tensor2<B> jtinv = inverse(jt);
      const B detjt = determinant(jt);
      const B invj = B(Number(1)) / strain.jac;
      w_ref = (invj * detjt * B(wq)) * matmul(to_tensor(tau), transpose(jtinv));
    }
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) s.grad[c][d][q] = w_ref(c, d);
  }

  for (int c = 0; c < 3; ++c)
    scatter_gradient_to_nodes(b1.Bt.data(), b1.Dt.data(), nn, nq,
                              s.grad[c][0].data(), s.grad[c][1].data(),
                              s.grad[c][2].data(), s.work.data(),
                              s.local_out[c].data());
  element_scatter_add(s.local_out, elems, count, output);
}

template <typename Number>
void ElasticOperator<Number>::apply_tangent(const std::vector<Number>& du,
                                            std::vector<Number>& y) const {
  if (!linearized_)
    throw StaleCache("apply_tangent: update_linearization has not run");
  if (du.size() != static_cast<std::size_t>(n_dofs()))
    throw SizeMismatch("apply_tangent: vector size mismatch");
  std::vector<Number> masked = du;
  level_->dirichlet_set_zero(masked);
  y.assign(du.size(), Number(0));

  const Basis1D& b1 = level_->basis();
  const int nn3 = b1.nn() * b1.nn() * b1.nn();
  const int nq3 = b1.nq() * b1.nq() * b1.nq();
  const int mx3 = std::max(nn3, nq3);
  parallel_over_colors([&](const std::int64_t* elems, int count) {
    thread_local Scratch s;
    s.init(nn3, nq3, mx3);
    element_tangent_batch(elems, count, masked, y, s);
  });
  // identity on constrained rows
  const auto& mask = level_->dirichlet_mask();
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) y[i] = du[i];
}

template <typename Number>
void ElasticOperator<Number>::evaluate_residual(const std::vector<Number>& u,
                                                std::vector<Number>& r) const {
  if (u.size() != static_cast<std::size_t>(n_dofs()))
    throw SizeMismatch("evaluate_residual: vector size mismatch");
  r.assign(u.size(), Number(0));
  const Basis1D& b1 = level_->basis();
  const int nn3 = b1.nn() * b1.nn() * b1.nn();
  const int nq3 = b1.nq() * b1.nq() * b1.nq();
  const int mx3 = std::max(nn3, nq3);
  parallel_over_colors([&](const std::int64_t* elems, int count) {
    thread_local Scratch s;
    s.init(nn3, nq3, mx3);
    element_residual_batch(elems, count, u, r, s);
  });
  for (std::size_t i = 0; i < load_vector_.size(); ++i)
    r[i] -= load_scale_ * load_vector_[i];
  level_->dirichlet_set_zero(r);
}

template <typename Number>
void ElasticOperator<Number>::update_linearization(
    const std::vector<double>& u_k) {
  if (u_k.size() != static_cast<std::size_t>(n_dofs()))
    throw SizeMismatch("update_linearization: vector size mismatch");
  u_k_ = u_k;
  u_k_num_.assign(u_k.begin(), u_k.end());
  checksum_ = fnv1a(u_k_.data(), u_k_.size() * sizeof(double));

  const FeLevel& lv = *level_;
  const Basis1D& b1 = lv.basis();
  const int nn = b1.nn(), nq = b1.nq();
  const int nn3 = nn * nn * nn, nq3 = nq * nq * nq;
  const std::int64_t nel = lv.mesh().element_count();
  const std::int64_t nqp = nel * nq3;

  const bool material = form_.domain == Domain::material;
  const bool want_scalars = strategy_ != Strategy::none;
  const bool want_tensors = strategy_ == Strategy::tensor;
  auto sized = [&](std::vector<Number>& v, std::int64_t mult, bool on) {
    v.assign(on ? nqp * mult : 0, Number(0));
  };
  sized(f_.lnj, 1, want_scalars);
  sized(f_.jm1, 1, want_scalars && model_ != ModelKind::cnh);
  sized(f_.jp, 1, want_scalars && model_ != ModelKind::cnh);
  sized(f_.c1, 1, want_scalars && model_ != ModelKind::cnh);
  sized(f_.c2, 1, want_scalars && model_ != ModelKind::cnh);
  for (int i = 0; i < 2; ++i) {
    sized(f_.c3[i], 1, want_scalars && model_ == ModelKind::fiber);
    sized(f_.istar[i], 1, want_scalars && model_ == ModelKind::fiber);
    sized(f_.efib[i], 1, want_scalars && model_ == ModelKind::fiber);
  }
  sized(f_.invj, 1, !material);
  sized(f_.jt, 9, !material);
  sized(f_.F, 9, want_tensors && material);
  sized(f_.S, 6, want_tensors && material);
  sized(f_.Finv, 9, want_tensors && material);
  sized(f_.Cinv, 6, want_tensors && material);
  sized(f_.tau, 6, want_tensors && !material);
  sized(f_.b, 6, want_tensors && !material && model_ != ModelKind::cnh);
  for (int i = 0; i < 2; ++i)
    sized(f_.fh[i], 6, want_tensors && !material && model_ == ModelKind::fiber);

  const int n = lv.mesh().n();
  std::vector<double> local(nn3), work(4 * std::max(nn3, nq3));
  std::vector<double> g[3][3];
  for (auto& row : g)
    for (auto& v : row) v.assign(nq3, 0.0);
  std::vector<std::int64_t> nodes(nn3);
  std::vector<double> comp(nn3);

  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::int64_t e = lv.element_index(i, j, k);
        lv.element_nodes(i, j, k, nodes.data());
        for (int c = 0; c < 3; ++c) {
          for (int m = 0; m < nn3; ++m) comp[m] = u_k[3 * nodes[m] + c];
          gradient_at_qpoints(b1.B.data(), b1.D.data(), nn, nq, comp.data(),
                              work.data(), g[c][0].data(), g[c][1].data(),
                              g[c][2].data());
        }
        for (int q = 0; q < nq3; ++q) {
          const double* J0 = &lv.jacobians()[(e * nq3 + q) * 9];
          Tensor2<double> j0, gref;
          for (int m = 0; m < 9; ++m) j0.a[m] = J0[m];
          for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d) gref(c, d) = g[c][d][q];
          const Tensor2<double> gk = matmul(gref, inverse(j0));
          QpCache<double> cache;
          try {
            cache = compute_cache(model_, params_, st_, gk, strategy_,
                                  form_.domain, cfg_, form_.stability);
          } catch (const NonPositiveJacobian&) {
            throw NonPositiveJacobian("update_linearization: det(F) <= 0", e,
                                      q);
          }
          const std::int64_t at = e * nq3 + q;
          if (want_scalars) {
            f_.lnj[at] = Number(cache.lnj);
            if (model_ != ModelKind::cnh) {
              f_.jm1[at] = Number(cache.jm1);
              f_.jp[at] = Number(cache.jp);
              f_.c1[at] = Number(cache.c1);
              f_.c2[at] = Number(cache.c2);
            }
            if (model_ == ModelKind::fiber)
              for (int fi = 0; fi < 2; ++fi) {
                f_.c3[fi][at] = Number(cache.c3[fi]);
                f_.istar[fi][at] = Number(cache.istar[fi]);
                f_.efib[fi][at] = Number(cache.efib[fi]);
              }
          }
          if (!material) {
            f_.invj[at] = Number(1.0 / cache.jac);
            const Tensor2<double> jt = j0 + gref;
            const double detjt = determinant(jt);
            if (!(detjt > 0))
              throw NonPositiveJacobian("update_linearization: det(J_t) <= 0",
                                        e, q);
            for (int m = 0; m < 9; ++m) f_.jt[at * 9 + m] = Number(jt.a[m]);
          }
          if (want_tensors) {
            if (material) {
              for (int m = 0; m < 9; ++m) {
                f_.F[at * 9 + m] = Number(cache.F.a[m]);
                f_.Finv[at * 9 + m] = Number(cache.Finv.a[m]);
              }
              for (int m = 0; m < 6; ++m) {
                f_.S[at * 6 + m] = Number(cache.S.s[m]);
                f_.Cinv[at * 6 + m] = Number(cache.Cinv.s[m]);
              }
            } else {
              for (int m = 0; m < 6; ++m) {
                f_.tau[at * 6 + m] = Number(cache.tau.s[m]);
                if (model_ != ModelKind::cnh)
                  f_.b[at * 6 + m] = Number(cache.b.s[m]);
              }
              if (model_ == ModelKind::fiber)
                for (int fi = 0; fi < 2; ++fi)
                  for (int m = 0; m < 6; ++m)
                    f_.fh[fi][at * 6 + m] = Number(cache.fh[fi].s[m]);
            }
          }
        }
      }
  linearized_ = true;
}

template <typename Number>
std::pair<std::vector<Number>, std::vector<std::int64_t>>
ElasticOperator<Number>::compute_diagonal() const {
  if (!linearized_)
    throw StaleCache("compute_diagonal: update_linearization has not run");
  std::vector<Number> diag(n_dofs(), Number(0));
  const Basis1D& b1 = level_->basis();
  const int nn = b1.nn();
  const int nn3 = nn * nn * nn;
  const int nq3 = b1.nq() * b1.nq() * b1.nq();
  const int mx3 = std::max(nn3, nq3);
  const int n = level_->mesh().n();

  // Dummy global input; unit vectors are injected element-locally.
  std::vector<Number> zero(n_dofs(), Number(0));
  parallel_over_colors([&](const std::int64_t* elems, int count) {
    thread_local Scratch s;
    s.init(nn3, nq3, mx3);
    const bool need_uk = strategy_ != Strategy::tensor;
    if (need_uk) {
      element_gather(u_k_num_, elems, count, s.local_uk);
      gradients_of(s.local_uk, s, s.grad_uk);
    }
    // cache the per-point bundles once per batch
    s.bundles.clear();
    s.bundles.reserve(nq3);
    s.jts.assign(nq3, Tensor2<B>{});
    s.det0w.assign(nq3, B(Number(0)));
    s.j0inv.assign(nq3, Tensor2<B>{});
    const bool material = form_.domain == Domain::material;
    for (int q = 0; q < nq3; ++q) {
      Tensor2<B> j0;
      B det0;
      qp_mapping(elems, count, q, j0, det0);
      const int qa = q % b1.nq(), qb = (q / b1.nq()) % b1.nq(),
                qc = q / (b1.nq() * b1.nq());
      const Number wq = Number(b1.qwts[qa] * b1.qwts[qb] * b1.qwts[qc]);
      Tensor2<B> gk;
      const Tensor2<B> j0i = inverse(j0);
      if (need_uk) gk = matmul(qp_ref_gradient(s.grad_uk, q), j0i);
      s.bundles.push_back(qp_cache_for_apply(elems, count, q, &gk));
      s.j0inv[q] = j0i;
      if (material) {
        s.det0w[q] = det0 * B(wq);
      } else {
        const Tensor2<B> jt = load_jt(elems, count, q);
        s.jts[q] = inverse(jt);
        const B invj = load_field(f_.invj, elems, count, q);
        s.det0w[q] = invj * determinant(jt) * B(wq);
      }
    }
    std::vector<std::int64_t> nodes(nn3);
    for (int ldof = 0; ldof < 3 * nn3; ++ldof) {
      const int c_in = ldof % 3;
      const int m_in = ldof / 3;
      for (int c = 0; c < 3; ++c)
        for (int m = 0; m < nn3; ++m)
          s.local_in[c][m] = B(Number(c == c_in && m == m_in ? 1 : 0));
      gradients_of(s.local_in, s, s.grad);
      for (int q = 0; q < nq3; ++q) {
        Tensor2<B> w_ref;
        if (material) {
          const Tensor2<B> dg = matmul(qp_ref_gradient(s.grad, q), s.j0inv[q]);
          const SymTensor2<B> ds =
              tangent_material(params_, st_, s.bundles[q], dg);
          const Tensor2<B> w_mat =
              matmul(dg, s.bundles[q].S) + matmul(s.bundles[q].F, ds);
          w_ref = s.det0w[q] * matmul(w_mat, transpose(s.j0inv[q]));
        } else {
          const Tensor2<B> dgrad =
              matmul(qp_ref_gradient(s.grad, q), s.jts[q]);
          const Tensor2<B> w_sp =
              tangent_spatial(params_, st_, s.bundles[q], dgrad);
          w_ref = s.det0w[q] * matmul(w_sp, transpose(s.jts[q]));
        }
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) s.grad[c][d][q] = w_ref(c, d);
      }
      for (int c = 0; c < 3; ++c)
        for (int m = 0; m < nn3; ++m) s.local_out[c][m] = B(Number(0));
      for (int c = 0; c < 3; ++c)
        scatter_gradient_to_nodes(b1.Bt.data(), b1.Dt.data(), nn, b1.nq(),
                                  s.grad[c][0].data(), s.grad[c][1].data(),
                                  s.grad[c][2].data(), s.work.data(),
                                  s.local_out[c].data());
      // take the (ldof, ldof) entry per lane and scatter
      for (int l = 0; l < count; ++l) {
        const std::int64_t e = elems[l];
        const int i = static_cast<int>(e % n);
        const int j = static_cast<int>((e / n) % n);
        const int k = static_cast<int>(e / (static_cast<std::int64_t>(n) * n));
        level_->element_nodes(i, j, k, nodes.data());
        diag[3 * nodes[m_in] + c_in] += s.local_out[c_in][m_in].lane[l];
      }
    }
  });

  const auto& mask = level_->dirichlet_mask();
  std::vector<std::int64_t> nonpositive;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i])
      diag[i] = Number(1);
    else if (!(diag[i] > Number(0)))
      nonpositive.push_back(static_cast<std::int64_t>(i));
  }
  return {std::move(diag), std::move(nonpositive)};
}

template <typename Number>
void ElasticOperator<Number>::build_load_vector() {
  load_vector_.assign(n_dofs(), Number(0));
  const FeLevel& lv = *level_;
  const Basis1D& b1 = lv.basis();
  const int nn = b1.nn(), nq = b1.nq();
  const int nn3 = nn * nn * nn, nq3 = nq * nq * nq;
  std::vector<double> load_d(n_dofs(), 0.0);

  if (loads_.body_force) {
    // (v, B)_Omega0 via values at quadrature points
    std::vector<std::int64_t> nodes(nn3);
    std::vector<double> xq[3], vals(nq3), work(4 * std::max(nn3, nq3)),
        comp(nn3), contrib(nn3);
    for (auto& v : xq) v.assign(nq3, 0.0);
    const int n = lv.mesh().n();
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const std::int64_t e = lv.element_index(i, j, k);
          lv.element_nodes(i, j, k, nodes.data());
          for (int c = 0; c < 3; ++c) {
            for (int m = 0; m < nn3; ++m)
              comp[m] = lv.node_coords()[3 * nodes[m] + c];
            // values at qpoints: B sweeps along all three axes
            sweep_axis0(b1.B.data(), nq, nn, comp.data(), nn, nn, work.data());
            sweep_axis1(b1.B.data(), nq, nn, work.data(), nq, nn,
                        work.data() + nq3);
            sweep_axis2(b1.B.data(), nq, nn, work.data() + nq3, nq, nq,
                        xq[c].data());
          }
          for (int c = 0; c < 3; ++c) {
            for (int q = 0; q < nq3; ++q) {
              const double* J0 = &lv.jacobians()[(e * nq3 + q) * 9];
              Tensor2<double> j0;
              for (int m = 0; m < 9; ++m) j0.a[m] = J0[m];
              const int qa = q % nq, qb = (q / nq) % nq, qc = q / (nq * nq);
              const double w = b1.qwts[qa] * b1.qwts[qb] * b1.qwts[qc];
              const Vec3d x{{{xq[0][q], xq[1][q], xq[2][q]}}};
              vals[q] = loads_.body_force(x)[c] * determinant(j0) * w;
            }
            // transpose value sweeps accumulate (v_i, B)
            sweep_axis0(b1.Bt.data(), nn, nq, vals.data(), nq, nq, work.data());
            sweep_axis1(b1.Bt.data(), nn, nq, work.data(), nn, nq,
                        work.data() + nn3);
            sweep_axis2(b1.Bt.data(), nn, nq, work.data() + nn3, nn, nn,
                        contrib.data());
            for (int m = 0; m < nn3; ++m)
              load_d[3 * nodes[m] + c] += contrib[m];
          }
        }
  }

  // Face tractions with (p+1)^2 Gauss points per face element, integrated
  // over the material configuration.
  auto add_face = [&](int face, auto traction_fn) {
    const int n = lv.mesh().n();
    const int p = b1.p;
    const int axis = face / 2;          // normal axis
    const bool upper = face % 2 == 1;   // +side
    const int t1 = (axis + 1) % 3, t2 = (axis + 2) % 3;
    std::vector<std::int64_t> nodes(nn3);
    // iterate face elements
    for (int ej = 0; ej < n; ++ej)
      for (int ei = 0; ei < n; ++ei) {
        int idx[3];
        idx[axis] = upper ? n - 1 : 0;
        idx[t1] = ei;
        idx[t2] = ej;
        lv.element_nodes(idx[0], idx[1], idx[2], nodes.data());
        const int lface = upper ? p : 0;  // local layer on the normal axis
        // local node index from (a_t1, a_t2) on the face
        auto lnode = [&](int a1, int a2) {
          int loc[3];
          loc[axis] = lface;
          loc[t1] = a1;
          loc[t2] = a2;
          return (loc[2] * nn + loc[1]) * nn + loc[0];
        };
        for (int q2 = 0; q2 < nq; ++q2)
          for (int q1 = 0; q1 < nq; ++q1) {
            // position and tangents at the face quadrature point
            Vec3d x{{{0, 0, 0}}}, tg1{{{0, 0, 0}}}, tg2{{{0, 0, 0}}};
            for (int a2 = 0; a2 < nn; ++a2)
              for (int a1 = 0; a1 < nn; ++a1) {
                const double v1 = b1.B[q1 * nn + a1], d1 = b1.D[q1 * nn + a1];
                const double v2 = b1.B[q2 * nn + a2], d2 = b1.D[q2 * nn + a2];
                const std::int64_t g = nodes[lnode(a1, a2)];
                for (int c = 0; c < 3; ++c) {
                  const double xc = lv.node_coords()[3 * g + c];
                  x[c] += v1 * v2 * xc;
                  tg1[c] += d1 * v2 * xc;
                  tg2[c] += v1 * d2 * xc;
                }
              }
            Vec3d nrm = cross(tg1, tg2);
            // orient outward: cross(t1,t2) follows the cyclic axes; on the
            // lower face the outward normal points the other way
            const double sgn = upper ? 1.0 : -1.0;
            const double area = std::sqrt(dot(nrm, nrm));
            Vec3d unit{{{sgn * nrm[0] / area, sgn * nrm[1] / area,
                         sgn * nrm[2] / area}}};
            const Vec3d h = traction_fn(x, unit);
            const double w = b1.qwts[q1] * b1.qwts[q2] * area;
            for (int a2 = 0; a2 < nn; ++a2)
              for (int a1 = 0; a1 < nn; ++a1) {
                const double phi = b1.B[q1 * nn + a1] * b1.B[q2 * nn + a2];
                const std::int64_t g = nodes[lnode(a1, a2)];
                for (int c = 0; c < 3; ++c)
                  load_d[3 * g + c] += phi * w * h[c];
              }
          }
      }
  };

  if (loads_.pressure != 0.0) {
    const double pmag = loads_.pressure;
    add_face(loads_.pressure_face,
             [pmag](const Vec3d&, const Vec3d& nrm) {
               return Vec3d{{{-pmag * nrm[0], -pmag * nrm[1], -pmag * nrm[2]}}};
             });
  }
  if (loads_.traction)
    for (int face = 0; face < 6; ++face)
      if (loads_.traction_faces[face]) add_face(face, loads_.traction);

  for (std::size_t i = 0; i < load_d.size(); ++i)
    load_vector_[i] = Number(load_d[i]);
}

/// Test oracle: assembles K column by column through apply_tangent.
template <typename Number>
std::vector<std::vector<Number>> assemble_matrix_oracle(
    const ElasticOperator<Number>& op, std::int64_t cap = 5000) {
  const std::int64_t n = op.n_dofs();
  if (n > cap) throw TooLarge("assemble_matrix_oracle: DoF count above cap");
  std::vector<std::vector<Number>> K(n, std::vector<Number>(n, Number(0)));
  std::vector<Number> e(n, Number(0)), col;
  for (std::int64_t j = 0; j < n; ++j) {
    e[j] = Number(1);
    op.apply_tangent(e, col);
    for (std::int64_t i = 0; i < n; ++i) K[i][j] = col[i];
    e[j] = Number(0);
  }
  return K;
}

}  // namespace emf

#endif
