#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rhf/symbols.hpp"

namespace rhf {

using Vec = std::vector<double>;

struct Mat {
  int rows = 0, cols = 0;
  Vec a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
  void zero() { std::fill(a.begin(), a.end(), 0.0); }
};

// y = W x (+ y0)
void matvec(const Mat& w, const Vec& x, Vec& y);
void matvec_acc(const Mat& w, const Vec& x, Vec& y);
// y += W^T x
void matvec_t_acc(const Mat& w, const Vec& x, Vec& y);
// W += a x^T
void outer_acc(const Vec& a, const Vec& x, Mat& w);
void axpy(double alpha, const Vec& x, Vec& y);

Vec softmax(const Vec& logits);
int argmax(const Vec& v);

// Samples an index from a probability vector using one uniform draw.
int sample_categorical(const Vec& probs, std::mt19937_64& rng);

// loss = err^2/2 inside |err| <= delta, linear outside; d(loss)/d(pred).
struct HuberValue {
  double loss;
  double grad;
};
HuberValue huber_loss(double pred, double target, double delta = 1.0);

enum class Activation : std::uint8_t { Relu, Linear, Softmax };

struct Dense {
  Mat w;
  Vec b;
  Activation act = Activation::Linear;

  Dense() = default;
  Dense(int out, int in, Activation a) : w(out, in), b(out, 0.0), act(a) {}
  int in_size() const { return w.cols; }
  int out_size() const { return w.rows; }

  Vec forward(const Vec& x) const;
  // Pre-activation forward; backward works on these.
  Vec affine(const Vec& x) const;
};

struct DenseGrad {
  Mat dw;
  Vec db;

  DenseGrad() = default;
  explicit DenseGrad(const Dense& d) : dw(d.w.rows, d.w.cols), db(d.b.size(), 0.0) {}
  void zero() { dw.zero(); std::fill(db.begin(), db.end(), 0.0); }
};

// Accumulates parameter gradients for dy w.r.t. the layer's pre-activation
// output y = act(z), z = Wx + b, and returns dx. `z` is the cached
// pre-activation; Relu and Linear only.
Vec dense_backward(const Dense& layer, const Vec& x, const Vec& z, const Vec& dy,
                   DenseGrad& grad);

// Gated recurrent cell:
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   c = tanh(Wh x + Uh (r.h) + bh)
//   h' = z.h + (1-z).c
struct GruCell {
  Mat wz, uz, wr, ur, wh, uh;
  Vec bz, br, bh;

  GruCell() = default;
  GruCell(int hidden, int input)
      : wz(hidden, input), uz(hidden, hidden), wr(hidden, input), ur(hidden, hidden),
        wh(hidden, input), uh(hidden, hidden), bz(hidden, 0.0), br(hidden, 0.0),
        bh(hidden, 0.0) {}
  int hidden_size() const { return wz.rows; }
  int input_size() const { return wz.cols; }
};

struct GruCache {
  Vec x, h_prev, z, r, c, rh, h;
};

Vec gru_forward(const GruCell& cell, const Vec& x, const Vec& h_prev);
GruCache gru_forward_cached(const GruCell& cell, const Vec& x, const Vec& h_prev);

struct GruGrad {
  Mat dwz, duz, dwr, dur, dwh, duh;
  Vec dbz, dbr, dbh;

  GruGrad() = default;
  explicit GruGrad(const GruCell& c)
      : dwz(c.wz.rows, c.wz.cols), duz(c.uz.rows, c.uz.cols), dwr(c.wr.rows, c.wr.cols),
        dur(c.ur.rows, c.ur.cols), dwh(c.wh.rows, c.wh.cols), duh(c.uh.rows, c.uh.cols),
        dbz(c.bz.size(), 0.0), dbr(c.br.size(), 0.0), dbh(c.bh.size(), 0.0) {}
  void zero();
};

// Accumulates parameter gradients for dh = dL/dh' and returns dL/dh_prev.
Vec gru_backward(const GruCell& cell, const GruCache& cache, const Vec& dh, GruGrad& grad);

// Named view onto a parameter (or gradient) tensor; cols == 1 for vectors.
struct TensorRef {
  std::string name;
  int rows = 0, cols = 1;
  Vec* data = nullptr;

  size_t size() const { return static_cast<size_t>(rows) * cols; }
};

std::vector<TensorRef> dense_tensors(const std::string& prefix, Dense& d);
std::vector<TensorRef> dense_grad_tensors(const std::string& prefix, DenseGrad& g);
std::vector<TensorRef> gru_tensors(const std::string& prefix, GruCell& c);
std::vector<TensorRef> gru_grad_tensors(const std::string& prefix, GruGrad& g);

// Glorot-uniform weights, zero biases.
void init_dense(Dense& d, std::mt19937_64& rng);
void init_gru(GruCell& c, std::mt19937_64& rng);

enum class UpdateDirection : std::uint8_t { Ascend, Descend };

class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void apply(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads,
             UpdateDirection dir);

 private:
  double lr_, beta1_, beta2_, eps_;
  long steps_ = 0;
  Vec m_, v_;
};

class RmspropOptimizer {
 public:
  explicit RmspropOptimizer(double lr = 1e-3, double rho = 0.9, double eps = 1e-7)
      : lr_(lr), rho_(rho), eps_(eps) {}

  void apply(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads,
             UpdateDirection dir);

 private:
  double lr_, rho_, eps_;
  Vec acc_;
};

// Flat text checkpoint with named, shape-checked entries.
void save_tensors(const std::vector<TensorRef>& tensors, const std::string& path);
void load_tensors(const std::vector<TensorRef>& tensors, const std::string& path);

}  // namespace rhf
