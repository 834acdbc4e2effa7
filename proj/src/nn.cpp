#include "rhf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rhf {

void matvec(const Mat& w, const Vec& x, Vec& y) {
  y.assign(w.rows, 0.0);
  matvec_acc(w, x, y);
}

void matvec_acc(const Mat& w, const Vec& x, Vec& y) {
  const double* p = w.a.data();
  for (int r = 0; r < w.rows; ++r) {
    double acc = 0.0;
    for (int c = 0; c < w.cols; ++c) acc += p[c] * x[c];
    y[r] += acc;
    p += w.cols;
  }
}

void matvec_t_acc(const Mat& w, const Vec& x, Vec& y) {
  const double* p = w.a.data();
  for (int r = 0; r < w.rows; ++r) {
    const double xr = x[r];
    for (int c = 0; c < w.cols; ++c) y[c] += p[c] * xr;
    p += w.cols;
  }
}

void outer_acc(const Vec& a, const Vec& x, Mat& w) {
  double* p = w.a.data();
  for (int r = 0; r < w.rows; ++r) {
    const double ar = a[r];
    for (int c = 0; c < w.cols; ++c) p[c] += ar * x[c];
    p += w.cols;
  }
}

void axpy(double alpha, const Vec& x, Vec& y) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

Vec softmax(const Vec& logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

int argmax(const Vec& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

int sample_categorical(const Vec& probs, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cdf = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    cdf += probs[i];
    if (u < cdf) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

HuberValue huber_loss(double pred, double target, double delta) {
  double err = pred - target;
  double abserr = std::abs(err);
  if (abserr <= delta) return {0.5 * err * err, err};
  return {delta * (abserr - 0.5 * delta), err > 0 ? delta : -delta};
}

Vec Dense::affine(const Vec& x) const {
  Vec z = b;
  matvec_acc(w, x, z);
  return z;
}

Vec Dense::forward(const Vec& x) const {
  Vec z = affine(x);
  switch (act) {
    case Activation::Linear:
      return z;
    case Activation::Relu:
      for (double& v : z) v = v > 0.0 ? v : 0.0;
      return z;
    case Activation::Softmax:
      return softmax(z);
  }
  return z;
}

Vec dense_backward(const Dense& layer, const Vec& x, const Vec& z, const Vec& dy,
                   DenseGrad& grad) {
  Vec dz = dy;
  if (layer.act == Activation::Relu) {
    for (size_t i = 0; i < dz.size(); ++i)
      if (z[i] <= 0.0) dz[i] = 0.0;
  } else if (layer.act == Activation::Softmax) {
    throw std::logic_error("dense_backward: softmax handled at the loss site");
  }
  outer_acc(dz, x, grad.dw);
  axpy(1.0, dz, grad.db);
  Vec dx(x.size(), 0.0);
  matvec_t_acc(layer.w, dz, dx);
  return dx;
}

namespace {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

GruCache gru_forward_cached(const GruCell& cell, const Vec& x, const Vec& h_prev) {
  GruCache cc;
  cc.x = x;
  cc.h_prev = h_prev;
  const int n = cell.hidden_size();

  cc.z = cell.bz;
  matvec_acc(cell.wz, x, cc.z);
  matvec_acc(cell.uz, h_prev, cc.z);
  for (double& v : cc.z) v = sigmoid(v);

  cc.r = cell.br;
  matvec_acc(cell.wr, x, cc.r);
  matvec_acc(cell.ur, h_prev, cc.r);
  for (double& v : cc.r) v = sigmoid(v);

  cc.rh.resize(n);
  for (int i = 0; i < n; ++i) cc.rh[i] = cc.r[i] * h_prev[i];

  cc.c = cell.bh;
  matvec_acc(cell.wh, x, cc.c);
  matvec_acc(cell.uh, cc.rh, cc.c);
  for (double& v : cc.c) v = std::tanh(v);

  cc.h.resize(n);
  for (int i = 0; i < n; ++i) cc.h[i] = cc.z[i] * h_prev[i] + (1.0 - cc.z[i]) * cc.c[i];
  return cc;
}

Vec gru_forward(const GruCell& cell, const Vec& x, const Vec& h_prev) {
  return gru_forward_cached(cell, x, h_prev).h;
}

void GruGrad::zero() {
  dwz.zero(); duz.zero(); dwr.zero(); dur.zero(); dwh.zero(); duh.zero();
  std::fill(dbz.begin(), dbz.end(), 0.0);
  std::fill(dbr.begin(), dbr.end(), 0.0);
  std::fill(dbh.begin(), dbh.end(), 0.0);
}

Vec gru_backward(const GruCell& cell, const GruCache& cc, const Vec& dh, GruGrad& grad) {
  const int n = cell.hidden_size();
  Vec dh_prev(n, 0.0);

  // h' = z.h_prev + (1-z).c
  Vec dz(n), dc(n);
  for (int i = 0; i < n; ++i) {
    dz[i] = dh[i] * (cc.h_prev[i] - cc.c[i]);
    dc[i] = dh[i] * (1.0 - cc.z[i]);
    dh_prev[i] += dh[i] * cc.z[i];
  }

  // c = tanh(ac), ac = Wh x + Uh (r.h_prev) + bh
  Vec dac(n);
  for (int i = 0; i < n; ++i) dac[i] = dc[i] * (1.0 - cc.c[i] * cc.c[i]);
  outer_acc(dac, cc.x, grad.dwh);
  outer_acc(dac, cc.rh, grad.duh);
  axpy(1.0, dac, grad.dbh);
  Vec drh(n, 0.0);
  matvec_t_acc(cell.uh, dac, drh);
  Vec dr(n);
  for (int i = 0; i < n; ++i) {
    dr[i] = drh[i] * cc.h_prev[i];
    dh_prev[i] += drh[i] * cc.r[i];
  }

  // gates
  Vec daz(n), dar(n);
  for (int i = 0; i < n; ++i) {
    daz[i] = dz[i] * cc.z[i] * (1.0 - cc.z[i]);
    dar[i] = dr[i] * cc.r[i] * (1.0 - cc.r[i]);
  }
  outer_acc(daz, cc.x, grad.dwz);
  outer_acc(daz, cc.h_prev, grad.duz);
  axpy(1.0, daz, grad.dbz);
  matvec_t_acc(cell.uz, daz, dh_prev);
  outer_acc(dar, cc.x, grad.dwr);
  outer_acc(dar, cc.h_prev, grad.dur);
  axpy(1.0, dar, grad.dbr);
  matvec_t_acc(cell.ur, dar, dh_prev);

  return dh_prev;
}

std::vector<TensorRef> dense_tensors(const std::string& prefix, Dense& d) {
  return {{prefix + ".w", d.w.rows, d.w.cols, &d.w.a}, {prefix + ".b", (int)d.b.size(), 1, &d.b}};
}

std::vector<TensorRef> dense_grad_tensors(const std::string& prefix, DenseGrad& g) {
  return {{prefix + ".w", g.dw.rows, g.dw.cols, &g.dw.a},
          {prefix + ".b", (int)g.db.size(), 1, &g.db}};
}

std::vector<TensorRef> gru_tensors(const std::string& prefix, GruCell& c) {
  return {{prefix + ".wz", c.wz.rows, c.wz.cols, &c.wz.a},
          {prefix + ".uz", c.uz.rows, c.uz.cols, &c.uz.a},
          {prefix + ".wr", c.wr.rows, c.wr.cols, &c.wr.a},
          {prefix + ".ur", c.ur.rows, c.ur.cols, &c.ur.a},
          {prefix + ".wh", c.wh.rows, c.wh.cols, &c.wh.a},
          {prefix + ".uh", c.uh.rows, c.uh.cols, &c.uh.a},
          {prefix + ".bz", (int)c.bz.size(), 1, &c.bz},
          {prefix + ".br", (int)c.br.size(), 1, &c.br},
          {prefix + ".bh", (int)c.bh.size(), 1, &c.bh}};
}

std::vector<TensorRef> gru_grad_tensors(const std::string& prefix, GruGrad& g) {
  return {{prefix + ".wz", g.dwz.rows, g.dwz.cols, &g.dwz.a},
          {prefix + ".uz", g.duz.rows, g.duz.cols, &g.duz.a},
          {prefix + ".wr", g.dwr.rows, g.dwr.cols, &g.dwr.a},
          {prefix + ".ur", g.dur.rows, g.dur.cols, &g.dur.a},
          {prefix + ".wh", g.dwh.rows, g.dwh.cols, &g.dwh.a},
          {prefix + ".uh", g.duh.rows, g.duh.cols, &g.duh.a},
          {prefix + ".bz", (int)g.dbz.size(), 1, &g.dbz},
          {prefix + ".br", (int)g.dbr.size(), 1, &g.dbr},
          {prefix + ".bh", (int)g.dbh.size(), 1, &g.dbh}};
}

namespace {

void glorot_fill(Mat& w, std::mt19937_64& rng) {
  double limit = std::sqrt(6.0 / (w.rows + w.cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : w.a) v = dist(rng);
}

size_t total_size(const std::vector<TensorRef>& ts) {
  size_t n = 0;
  for (const auto& t : ts) n += t.size();
  return n;
}

}  // namespace

void init_dense(Dense& d, std::mt19937_64& rng) {
  glorot_fill(d.w, rng);
  std::fill(d.b.begin(), d.b.end(), 0.0);
}

void init_gru(GruCell& c, std::mt19937_64& rng) {
  glorot_fill(c.wz, rng);
  glorot_fill(c.uz, rng);
  glorot_fill(c.wr, rng);
  glorot_fill(c.ur, rng);
  glorot_fill(c.wh, rng);
  glorot_fill(c.uh, rng);
  std::fill(c.bz.begin(), c.bz.end(), 0.0);
  std::fill(c.br.begin(), c.br.end(), 0.0);
  std::fill(c.bh.begin(), c.bh.end(), 0.0);
}

void AdamOptimizer::apply(const std::vector<TensorRef>& params,
                          const std::vector<TensorRef>& grads, UpdateDirection dir) {
  size_t n = total_size(params);
  if (n != total_size(grads)) throw std::logic_error("adam: parameter/gradient size mismatch");
  if (m_.empty()) {
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
  }
  ++steps_;
  double bc1 = 1.0 - std::pow(beta1_, steps_);
  double bc2 = 1.0 - std::pow(beta2_, steps_);
  double sign = dir == UpdateDirection::Ascend ? 1.0 : -1.0;
  size_t k = 0;
  for (size_t t = 0; t < params.size(); ++t) {
    Vec& p = *params[t].data;
    const Vec& g = *grads[t].data;
    for (size_t i = 0; i < p.size(); ++i, ++k) {
      double gi = g[i];
      if (!std::isfinite(gi)) throw DomainError("adam: non-finite gradient");
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * gi;
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * gi * gi;
      double mhat = m_[k] / bc1;
      double vhat = v_[k] / bc2;
      p[i] += sign * lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void RmspropOptimizer::apply(const std::vector<TensorRef>& params,
                             const std::vector<TensorRef>& grads, UpdateDirection dir) {
  size_t n = total_size(params);
  if (n != total_size(grads)) throw std::logic_error("rmsprop: parameter/gradient size mismatch");
  if (acc_.empty()) acc_.assign(n, 0.0);
  double sign = dir == UpdateDirection::Ascend ? 1.0 : -1.0;
  size_t k = 0;
  for (size_t t = 0; t < params.size(); ++t) {
    Vec& p = *params[t].data;
    const Vec& g = *grads[t].data;
    for (size_t i = 0; i < p.size(); ++i, ++k) {
      double gi = g[i];
      if (!std::isfinite(gi)) throw DomainError("rmsprop: non-finite gradient");
      acc_[k] = rho_ * acc_[k] + (1.0 - rho_) * gi * gi;
      p[i] += sign * lr_ * gi / (std::sqrt(acc_[k]) + eps_);
    }
  }
}

void save_tensors(const std::vector<TensorRef>& tensors, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write checkpoint '" + path + "'");
  out << "rhfparams 1\n" << tensors.size() << '\n';
  char buf[32];
  for (const auto& t : tensors) {
    out << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    const Vec& v = *t.data;
    for (size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      out << buf << (i + 1 == v.size() ? '\n' : ' ');
    }
    if (v.empty()) out << '\n';
  }
}

void load_tensors(const std::vector<TensorRef>& tensors, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open checkpoint '" + path + "'");
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "rhfparams" || version != 1)
    throw DomainError("checkpoint '" + path + "': bad header");
  size_t count = 0;
  if (!(in >> count) || count != tensors.size())
    throw DomainError("checkpoint '" + path + "': expected " + std::to_string(tensors.size()) +
                      " tensors, file has " + std::to_string(count));
  for (const auto& t : tensors) {
    std::string name;
    int rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols))
      throw DomainError("checkpoint '" + path + "': truncated tensor header");
    if (name != t.name)
      throw DomainError("checkpoint '" + path + "': expected tensor '" + t.name + "', found '" +
                        name + "'");
    if (rows != t.rows || cols != t.cols)
      throw DomainError("checkpoint '" + path + "': tensor '" + name + "' has shape " +
                        std::to_string(rows) + "x" + std::to_string(cols) + ", expected " +
                        std::to_string(t.rows) + "x" + std::to_string(t.cols));
    Vec& v = *t.data;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!(in >> v[i]))
        throw DomainError("checkpoint '" + path + "': truncated tensor '" + name + "'");
    }
  }
}

}  // namespace rhf
