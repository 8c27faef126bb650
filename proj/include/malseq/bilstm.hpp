#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "malseq/dex_types.hpp"
#include "malseq/error.hpp"
#include "malseq/rng.hpp"
#include "malseq/vectorize.hpp"

namespace malseq {

// Bidirectional LSTM with an additive attention layer and a two-class
// softmax head. All parameters live in one contiguous buffer so that
// serialization, the optimizer and finite-difference checks can treat the
// model as a flat vector.
//
// Layout, in order:
//   per direction (forward, backward):
//     Wx[gate] : H x v   gate order: input, forget, candidate, output
//     Wh[gate] : H x H
//     b[gate]  : H
//   t_a        : H       attention context vector
//   W_out      : 2 x H   class 0 = malicious, class 1 = benign
//   b_out      : 2
struct DetectionModel {
  std::uint32_t v = 0;  // input (embedding) dimension
  std::uint32_t H = 0;  // hidden size
  std::uint32_t L = 0;  // fixed input length
  std::uint64_t seed = 0;
  std::vector<double> params;

  static constexpr std::uint32_t kGates = 4;

  std::size_t dir_size() const {
    return static_cast<std::size_t>(kGates) * (static_cast<std::size_t>(H) * v +
                                               static_cast<std::size_t>(H) * H + H);
  }
  std::size_t wx_off(int dir, int gate) const {
    return dir * dir_size() + static_cast<std::size_t>(gate) * H * v;
  }
  std::size_t wh_off(int dir, int gate) const {
    return dir * dir_size() + static_cast<std::size_t>(kGates) * H * v +
           static_cast<std::size_t>(gate) * H * H;
  }
  std::size_t b_off(int dir, int gate) const {
    return dir * dir_size() + static_cast<std::size_t>(kGates) * (H * v + H * H) +
           static_cast<std::size_t>(gate) * H;
  }
  std::size_t ta_off() const { return 2 * dir_size(); }
  std::size_t wout_off() const { return ta_off() + H; }
  std::size_t bout_off() const { return wout_off() + 2 * static_cast<std::size_t>(H); }
  std::size_t param_count() const { return bout_off() + 2; }
};

inline DetectionModel init_detection_model(std::uint32_t v, std::uint32_t H, std::uint32_t L,
                                           std::uint64_t seed) {
  if (v == 0 || H == 0) raise(errc::zero_dimension, "model dimensions must be positive");
  DetectionModel m;
  m.v = v;
  m.H = H;
  m.L = L;
  m.seed = seed;
  m.params.resize(m.param_count());
  Rng rng(seed);
  for (auto& x : m.params) x = rng.uniform(-0.08, 0.08);
  for (int dir = 0; dir < 2; ++dir) {
    double* bf = m.params.data() + m.b_off(dir, 1);
    std::fill(bf, bf + H, 1.0);  // forget-gate bias
  }
  return m;
}

struct AttentionTrace {
  std::vector<double> alpha;  // size L; exactly zero on padded positions
  std::vector<double> h;      // valid_len x H summed hidden states
  std::vector<double> s;      // H, attention-weighted sum
  std::vector<double> s_prime;  // H, tanh(s)
  std::array<double, 2> p{};    // {malicious, benign}
  std::uint32_t valid_len = 0;
  std::vector<std::uint32_t> position_map;  // copied from the input
};

namespace nndetail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y += A x for row-major A (rows x cols)
inline void matvec_acc(const double* a, const double* x, double* y, std::uint32_t rows,
                       std::uint32_t cols) {
  for (std::uint32_t r = 0; r < rows; ++r) {
    const double* row = a + static_cast<std::size_t>(r) * cols;
    double acc = 0.0;
    for (std::uint32_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// y += A^T x for row-major A (rows x cols); x has rows entries, y cols
inline void matvec_t_acc(const double* a, const double* x, double* y, std::uint32_t rows,
                         std::uint32_t cols) {
  for (std::uint32_t r = 0; r < rows; ++r) {
    const double* row = a + static_cast<std::size_t>(r) * cols;
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::uint32_t c = 0; c < cols; ++c) y[c] += xr * row[c];
  }
}

// A += u v^T
inline void outer_acc(double* a, const double* u, const double* x, std::uint32_t rows,
                      std::uint32_t cols) {
  for (std::uint32_t r = 0; r < rows; ++r) {
    double* row = a + static_cast<std::size_t>(r) * cols;
    const double ur = u[r];
    if (ur == 0.0) continue;
    for (std::uint32_t c = 0; c < cols; ++c) row[c] += ur * x[c];
  }
}

struct StepCache {
  std::vector<double> gate_i, gate_f, cand, gate_o, c, tanh_c, h;
};

struct DirectionCache {
  std::vector<StepCache> steps;  // indexed by scan step k
};

// scan positions: forward k -> k, backward k -> T-1-k
inline std::uint32_t scan_position(int dir, std::uint32_t k, std::uint32_t T) {
  return dir == 0 ? k : T - 1 - k;
}

inline void run_direction(const DetectionModel& m, const PaddedVectorSequence& input,
                          std::uint32_t T, int dir, DirectionCache& cache) {
  const std::uint32_t H = m.H, v = m.v;
  cache.steps.resize(T);
  std::vector<double> h_prev(H, 0.0), c_prev(H, 0.0);
  std::vector<double> z(static_cast<std::size_t>(4) * H);
  const double* p = m.params.data();
  for (std::uint32_t k = 0; k < T; ++k) {
    const double* x = input.row(scan_position(dir, k, T));
    StepCache& st = cache.steps[k];
    for (int g = 0; g < 4; ++g) {
      double* zg = z.data() + static_cast<std::size_t>(g) * H;
      const double* bg = p + m.b_off(dir, g);
      std::copy(bg, bg + H, zg);
      matvec_acc(p + m.wx_off(dir, g), x, zg, H, v);
      matvec_acc(p + m.wh_off(dir, g), h_prev.data(), zg, H, H);
    }
    st.gate_i.resize(H);
    st.gate_f.resize(H);
    st.cand.resize(H);
    st.gate_o.resize(H);
    st.c.resize(H);
    st.tanh_c.resize(H);
    st.h.resize(H);
    for (std::uint32_t d = 0; d < H; ++d) {
      st.gate_i[d] = sigmoid(z[d]);
      st.gate_f[d] = sigmoid(z[H + d]);
      st.cand[d] = std::tanh(z[2 * H + d]);
      st.gate_o[d] = sigmoid(z[3 * H + d]);
      st.c[d] = st.gate_f[d] * c_prev[d] + st.gate_i[d] * st.cand[d];
      st.tanh_c[d] = std::tanh(st.c[d]);
      st.h[d] = st.gate_o[d] * st.tanh_c[d];
    }
    h_prev = st.h;
    c_prev = st.c;
  }
}

struct ForwardCache {
  DirectionCache dirs[2];
  std::vector<double> hsum;   // T x H
  std::vector<double> tt;     // T x H tanh(hsum)
  std::vector<double> alpha;  // T
  std::vector<double> s, s_prime;
  std::array<double, 2> logits{}, p{};
};

inline void run_forward(const DetectionModel& m, const PaddedVectorSequence& input,
                        ForwardCache& fc) {
  if (input.v != m.v || input.L != m.L) {
    raise(errc::dimension_mismatch,
          "input is " + std::to_string(input.L) + "x" + std::to_string(input.v) +
              ", model expects " + std::to_string(m.L) + "x" + std::to_string(m.v));
  }
  const std::uint32_t T = input.valid_len;
  const std::uint32_t H = m.H;
  run_direction(m, input, T, 0, fc.dirs[0]);
  run_direction(m, input, T, 1, fc.dirs[1]);

  fc.hsum.assign(static_cast<std::size_t>(T) * H, 0.0);
  fc.tt.assign(static_cast<std::size_t>(T) * H, 0.0);
  for (std::uint32_t t = 0; t < T; ++t) {
    const double* hf = fc.dirs[0].steps[t].h.data();
    const double* hb = fc.dirs[1].steps[T - 1 - t].h.data();
    double* hs = fc.hsum.data() + static_cast<std::size_t>(t) * H;
    double* tt = fc.tt.data() + static_cast<std::size_t>(t) * H;
    for (std::uint32_t d = 0; d < H; ++d) {
      hs[d] = hf[d] + hb[d];
      tt[d] = std::tanh(hs[d]);
    }
  }

  const double* ta = m.params.data() + m.ta_off();
  std::vector<double> e(T);
  double emax = -1e300;
  for (std::uint32_t t = 0; t < T; ++t) {
    const double* tt = fc.tt.data() + static_cast<std::size_t>(t) * H;
    double acc = 0.0;
    for (std::uint32_t d = 0; d < H; ++d) acc += ta[d] * tt[d];
    e[t] = acc;
    emax = std::max(emax, acc);
  }
  fc.alpha.assign(T, 0.0);
  double z = 0.0;
  for (std::uint32_t t = 0; t < T; ++t) {
    fc.alpha[t] = std::exp(e[t] - emax);
    z += fc.alpha[t];
  }
  if (T > 0) {
    for (std::uint32_t t = 0; t < T; ++t) fc.alpha[t] /= z;
  }

  fc.s.assign(H, 0.0);
  for (std::uint32_t t = 0; t < T; ++t) {
    const double* hs = fc.hsum.data() + static_cast<std::size_t>(t) * H;
    const double a = fc.alpha[t];
    for (std::uint32_t d = 0; d < H; ++d) fc.s[d] += a * hs[d];
  }
  fc.s_prime.resize(H);
  for (std::uint32_t d = 0; d < H; ++d) fc.s_prime[d] = std::tanh(fc.s[d]);

  const double* wo = m.params.data() + m.wout_off();
  const double* bo = m.params.data() + m.bout_off();
  for (int c = 0; c < 2; ++c) {
    double acc = bo[c];
    const double* row = wo + static_cast<std::size_t>(c) * H;
    for (std::uint32_t d = 0; d < H; ++d) acc += row[d] * fc.s_prime[d];
    fc.logits[c] = acc;
  }
  double lmax = std::max(fc.logits[0], fc.logits[1]);
  double lz = std::exp(fc.logits[0] - lmax) + std::exp(fc.logits[1] - lmax);
  fc.p[0] = std::exp(fc.logits[0] - lmax) / lz;
  fc.p[1] = std::exp(fc.logits[1] - lmax) / lz;
}

inline double cross_entropy(const ForwardCache& fc, Label y) {
  double lmax = std::max(fc.logits[0], fc.logits[1]);
  double logz = lmax + std::log(std::exp(fc.logits[0] - lmax) + std::exp(fc.logits[1] - lmax));
  return logz - fc.logits[y == Label::Malicious ? 0 : 1];
}

// Accumulates d(loss)/d(params) into grads (same layout as params); returns
// the sample loss.
inline double backward(const DetectionModel& m, const PaddedVectorSequence& input, Label y,
                       ForwardCache& fc, std::vector<double>& grads) {
  run_forward(m, input, fc);
  const double loss = cross_entropy(fc, y);
  const std::uint32_t T = input.valid_len;
  const std::uint32_t H = m.H, v = m.v;
  const double* p = m.params.data();
  double* g = grads.data();

  std::array<double, 2> dlogit = fc.p;
  dlogit[y == Label::Malicious ? 0 : 1] -= 1.0;

  // head
  double* g_wo = g + m.wout_off();
  double* g_bo = g + m.bout_off();
  std::vector<double> dsp(H, 0.0);
  const double* wo = p + m.wout_off();
  for (int c = 0; c < 2; ++c) {
    g_bo[c] += dlogit[c];
    double* row = g_wo + static_cast<std::size_t>(c) * H;
    const double* wrow = wo + static_cast<std::size_t>(c) * H;
    for (std::uint32_t d = 0; d < H; ++d) {
      row[d] += dlogit[c] * fc.s_prime[d];
      dsp[d] += dlogit[c] * wrow[d];
    }
  }

  std::vector<double> ds(H);
  for (std::uint32_t d = 0; d < H; ++d) {
    ds[d] = dsp[d] * (1.0 - fc.s_prime[d] * fc.s_prime[d]);
  }

  // attention
  std::vector<double> dhsum(static_cast<std::size_t>(T) * H, 0.0);
  std::vector<double> dalpha(T, 0.0);
  for (std::uint32_t t = 0; t < T; ++t) {
    const double* hs = fc.hsum.data() + static_cast<std::size_t>(t) * H;
    double* dh = dhsum.data() + static_cast<std::size_t>(t) * H;
    double acc = 0.0;
    for (std::uint32_t d = 0; d < H; ++d) {
      acc += ds[d] * hs[d];
      dh[d] += fc.alpha[t] * ds[d];
    }
    dalpha[t] = acc;
  }
  double inner = 0.0;
  for (std::uint32_t t = 0; t < T; ++t) inner += fc.alpha[t] * dalpha[t];
  const double* ta = p + m.ta_off();
  double* g_ta = g + m.ta_off();
  for (std::uint32_t t = 0; t < T; ++t) {
    const double de = fc.alpha[t] * (dalpha[t] - inner);
    const double* tt = fc.tt.data() + static_cast<std::size_t>(t) * H;
    double* dh = dhsum.data() + static_cast<std::size_t>(t) * H;
    for (std::uint32_t d = 0; d < H; ++d) {
      g_ta[d] += de * tt[d];
      dh[d] += de * ta[d] * (1.0 - tt[d] * tt[d]);
    }
  }

  // BPTT for each direction; the elementwise sum routes dhsum to both.
  std::vector<double> dh_carry(H), dc_carry(H), dh(H), dc(H);
  std::vector<double> dz(static_cast<std::size_t>(4) * H);
  for (int dir = 0; dir < 2; ++dir) {
    const auto& steps = fc.dirs[dir].steps;
    std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
    std::fill(dc_carry.begin(), dc_carry.end(), 0.0);
    for (std::uint32_t k = T; k-- > 0;) {
      const std::uint32_t pos = scan_position(dir, k, T);
      const StepCache& st = steps[k];
      const double* dext = dhsum.data() + static_cast<std::size_t>(pos) * H;
      const double* c_prev = k > 0 ? steps[k - 1].c.data() : nullptr;
      const double* h_prev = k > 0 ? steps[k - 1].h.data() : nullptr;
      for (std::uint32_t d = 0; d < H; ++d) {
        dh[d] = dext[d] + dh_carry[d];
        dc[d] = dc_carry[d] + dh[d] * st.gate_o[d] * (1.0 - st.tanh_c[d] * st.tanh_c[d]);
        const double do_ = dh[d] * st.tanh_c[d];
        const double di = dc[d] * st.cand[d];
        const double dcand = dc[d] * st.gate_i[d];
        const double df = c_prev ? dc[d] * c_prev[d] : 0.0;
        dc_carry[d] = dc[d] * st.gate_f[d];
        dz[d] = di * st.gate_i[d] * (1.0 - st.gate_i[d]);
        dz[H + d] = df * st.gate_f[d] * (1.0 - st.gate_f[d]);
        dz[2 * H + d] = dcand * (1.0 - st.cand[d] * st.cand[d]);
        dz[3 * H + d] = do_ * st.gate_o[d] * (1.0 - st.gate_o[d]);
      }
      const double* x = input.row(pos);
      std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
      for (int gate = 0; gate < 4; ++gate) {
        const double* dzg = dz.data() + static_cast<std::size_t>(gate) * H;
        outer_acc(g + m.wx_off(dir, gate), dzg, x, H, v);
        if (h_prev) outer_acc(g + m.wh_off(dir, gate), dzg, h_prev, H, H);
        double* gb = g + m.b_off(dir, gate);
        for (std::uint32_t d = 0; d < H; ++d) gb[d] += dzg[d];
        matvec_t_acc(p + m.wh_off(dir, gate), dzg, dh_carry.data(), H, H);
      }
    }
  }
  return loss;
}

}  // namespace nndetail

// Forward cell scans valid positions left to right, backward cell right to
// left; hidden states are summed elementwise. Attention softmax runs over
// valid positions only, so padded rows never influence the trace.
inline AttentionTrace forward_pass(const DetectionModel& model,
                                   const PaddedVectorSequence& input) {
  nndetail::ForwardCache fc;
  nndetail::run_forward(model, input, fc);
  AttentionTrace trace;
  trace.valid_len = input.valid_len;
  trace.position_map = input.position_map;
  trace.alpha.assign(model.L, 0.0);
  std::copy(fc.alpha.begin(), fc.alpha.end(), trace.alpha.begin());
  trace.h = std::move(fc.hsum);
  trace.s = std::move(fc.s);
  trace.s_prime = std::move(fc.s_prime);
  trace.p = fc.p;
  return trace;
}

struct LabeledInput {
  PaddedVectorSequence x;
  Label y;
};

struct TrainConfig {
  std::uint32_t epochs = 30;
  std::uint32_t batch = 16;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 42;
};

// Mini-batch Adam on softmax cross-entropy. Deterministic for a fixed seed
// and dataset order; returns the mean training loss per epoch.
inline std::vector<double> train(DetectionModel& model, const std::vector<LabeledInput>& dataset,
                                 const TrainConfig& config) {
  bool has_mal = false, has_ben = false;
  for (const auto& s : dataset) {
    (s.y == Label::Malicious ? has_mal : has_ben) = true;
  }
  if (!has_mal || !has_ben) {
    raise(errc::single_class_dataset, "training needs malicious and benign samples");
  }

  const std::size_t n_params = model.param_count();
  std::vector<double> grads(n_params), adam_m(n_params, 0.0), adam_v(n_params, 0.0);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> history;
  nndetail::ForwardCache fc;
  std::uint64_t step = 0;

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_int(static_cast<std::uint64_t>(i))]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      std::fill(grads.begin(), grads.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const LabeledInput& s = dataset[order[i]];
        batch_loss += nndetail::backward(model, s.x, s.y, fc, grads);
      }
      if (!std::isfinite(batch_loss)) {
        raise(errc::non_finite_loss, "training diverged at epoch " + std::to_string(epoch));
      }
      epoch_loss += batch_loss;
      const double scale = 1.0 / static_cast<double>(end - start);
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t j = 0; j < n_params; ++j) {
        const double gj = grads[j] * scale;
        adam_m[j] = config.beta1 * adam_m[j] + (1.0 - config.beta1) * gj;
        adam_v[j] = config.beta2 * adam_v[j] + (1.0 - config.beta2) * gj * gj;
        model.params[j] -=
            config.lr * (adam_m[j] / bc1) / (std::sqrt(adam_v[j] / bc2) + config.adam_eps);
      }
    }
    history.push_back(epoch_loss / static_cast<double>(dataset.size()));
  }
  return history;
}

struct Prediction {
  Label label = Label::Benign;
  std::array<double, 2> p{};
  AttentionTrace trace;
};

// argmax over p; an exact tie resolves to benign.
inline Prediction predict(const DetectionModel& model, const PaddedVectorSequence& input) {
  Prediction out;
  out.trace = forward_pass(model, input);
  out.p = out.trace.p;
  out.label = out.p[0] > 0.5 ? Label::Malicious : Label::Benign;
  return out;
}

struct GradientCheckResult {
  double max_rel_error = 0.0;
  std::vector<std::pair<std::string, double>> groups;  // per parameter group
};

// Central finite differences against the analytic gradient, parameter by
// parameter.
inline GradientCheckResult gradient_check(const DetectionModel& model,
                                          const PaddedVectorSequence& input, Label y,
                                          double epsilon) {
  DetectionModel work = model;
  std::vector<double> analytic(model.param_count(), 0.0);
  nndetail::ForwardCache fc;
  nndetail::backward(work, input, y, fc, analytic);

  auto loss_at = [&]() {
    nndetail::run_forward(work, input, fc);
    return nndetail::cross_entropy(fc, y);
  };

  struct Group {
    const char* name;
    std::size_t begin, end;
  };
  const std::vector<Group> groups = {
      {"forward_cell", work.wx_off(0, 0), work.wx_off(1, 0)},
      {"backward_cell", work.wx_off(1, 0), work.ta_off()},
      {"t_a", work.ta_off(), work.wout_off()},
      {"W_out", work.wout_off(), work.bout_off()},
      {"b_out", work.bout_off(), work.param_count()},
  };

  GradientCheckResult result;
  for (const auto& grp : groups) {
    double group_max = 0.0;
    for (std::size_t j = grp.begin; j < grp.end; ++j) {
      const double saved = work.params[j];
      work.params[j] = saved + epsilon;
      const double up = loss_at();
      work.params[j] = saved - epsilon;
      const double down = loss_at();
      work.params[j] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      // the floor keeps roundoff on near-zero gradients from dominating
      const double denom = std::max(std::abs(numeric) + std::abs(analytic[j]), 1e-5);
      const double rel = std::abs(numeric - analytic[j]) / denom;
      group_max = std::max(group_max, rel);
    }
    result.groups.emplace_back(grp.name, group_max);
    result.max_rel_error = std::max(result.max_rel_error, group_max);
  }
  return result;
}

}  // namespace malseq
