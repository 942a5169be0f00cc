#include "mobpat/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mobpat/rng.hpp"

namespace mobpat::predict {

namespace {

// Parameter block offsets into RnnModel::params. The elman layout is
// [w_xh C*H | w_hh H*H | b_h H | w_hy H*C | b_y C]; lstm widens the first
// three blocks by the four gates (G = 4H) in i, f, o, g order.
struct Layout {
  int gates = 0;  // H for elman, 4H for lstm
  std::size_t w_xh = 0, w_hh = 0, b_h = 0, w_hy = 0, b_y = 0, total = 0;
};

Layout layout_of(CellKind cell, int n_classes, int hidden) {
  Layout l;
  l.gates = cell == CellKind::lstm ? 4 * hidden : hidden;
  l.w_xh = 0;
  l.w_hh = l.w_xh + static_cast<std::size_t>(n_classes) * l.gates;
  l.b_h = l.w_hh + static_cast<std::size_t>(hidden) * l.gates;
  l.w_hy = l.b_h + static_cast<std::size_t>(l.gates);
  l.b_y = l.w_hy + static_cast<std::size_t>(hidden) * n_classes;
  l.total = l.b_y + static_cast<std::size_t>(n_classes);
  return l;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

// Full forward pass keeping per-step activations for BPTT. For elman cells
// the cell/gate buffers beyond h are unused.
struct Trace {
  std::vector<std::vector<double>> h;      // T+1 entries, h[0] = 0
  std::vector<std::vector<double>> c;      // lstm cell state, T+1 entries
  std::vector<std::vector<double>> gates;  // lstm activated gates per step
  std::vector<double> probs;
};

Trace forward_trace(const RnnModel& m, const std::vector<int>& window) {
  const Layout l = layout_of(m.cell, m.n_classes, m.hidden);
  const double* p = m.params.data();
  const int h_n = m.hidden;
  const std::size_t t_len = window.size();

  Trace tr;
  tr.h.assign(t_len + 1, std::vector<double>(h_n, 0.0));
  if (m.cell == CellKind::lstm) {
    tr.c.assign(t_len + 1, std::vector<double>(h_n, 0.0));
    tr.gates.assign(t_len, std::vector<double>(4 * h_n, 0.0));
  }

  std::vector<double> a(l.gates);
  for (std::size_t t = 0; t < t_len; ++t) {
    const int x = window[t];
    for (int g = 0; g < l.gates; ++g) {
      double acc = p[l.w_xh + static_cast<std::size_t>(x) * l.gates + g] + p[l.b_h + g];
      for (int j = 0; j < h_n; ++j) {
        acc += p[l.w_hh + static_cast<std::size_t>(j) * l.gates + g] * tr.h[t][j];
      }
      a[g] = acc;
    }
    if (m.cell == CellKind::elman) {
      for (int j = 0; j < h_n; ++j) tr.h[t + 1][j] = std::tanh(a[j]);
    } else {
      for (int j = 0; j < h_n; ++j) {
        const double i_g = sigmoid(a[j]);
        const double f_g = sigmoid(a[h_n + j]);
        const double o_g = sigmoid(a[2 * h_n + j]);
        const double g_g = std::tanh(a[3 * h_n + j]);
        tr.gates[t][j] = i_g;
        tr.gates[t][h_n + j] = f_g;
        tr.gates[t][2 * h_n + j] = o_g;
        tr.gates[t][3 * h_n + j] = g_g;
        tr.c[t + 1][j] = f_g * tr.c[t][j] + i_g * g_g;
        tr.h[t + 1][j] = o_g * std::tanh(tr.c[t + 1][j]);
      }
    }
  }

  tr.probs.assign(m.n_classes, 0.0);
  const auto& h_last = tr.h[t_len];
  for (int c = 0; c < m.n_classes; ++c) {
    double acc = p[l.b_y + c];
    for (int j = 0; j < h_n; ++j) acc += p[l.w_hy + static_cast<std::size_t>(j) * m.n_classes + c] * h_last[j];
    tr.probs[static_cast<std::size_t>(c)] = acc;
  }
  softmax_inplace(tr.probs);
  return tr;
}

// Cross-entropy gradient of the final prediction, backpropagated through
// every step of the window. Returns the unclipped gradient vector.
std::vector<double> backward(const RnnModel& m, const std::vector<int>& window, int label,
                             const Trace& tr) {
  const Layout l = layout_of(m.cell, m.n_classes, m.hidden);
  const double* p = m.params.data();
  const int h_n = m.hidden;
  const std::size_t t_len = window.size();

  std::vector<double> grad(l.total, 0.0);
  double* g = grad.data();

  std::vector<double> dlogits = tr.probs;
  dlogits[static_cast<std::size_t>(label)] -= 1.0;

  std::vector<double> dh(h_n, 0.0);
  for (int c = 0; c < m.n_classes; ++c) {
    g[l.b_y + c] += dlogits[static_cast<std::size_t>(c)];
    for (int j = 0; j < h_n; ++j) {
      g[l.w_hy + static_cast<std::size_t>(j) * m.n_classes + c] +=
          tr.h[t_len][j] * dlogits[static_cast<std::size_t>(c)];
      dh[j] += p[l.w_hy + static_cast<std::size_t>(j) * m.n_classes + c] *
               dlogits[static_cast<std::size_t>(c)];
    }
  }

  std::vector<double> da(l.gates, 0.0);
  std::vector<double> dc(h_n, 0.0);
  for (std::size_t t = t_len; t-- > 0;) {
    if (m.cell == CellKind::elman) {
      for (int j = 0; j < h_n; ++j) {
        da[j] = dh[j] * (1.0 - tr.h[t + 1][j] * tr.h[t + 1][j]);
      }
    } else {
      for (int j = 0; j < h_n; ++j) {
        const double i_g = tr.gates[t][j];
        const double f_g = tr.gates[t][h_n + j];
        const double o_g = tr.gates[t][2 * h_n + j];
        const double g_g = tr.gates[t][3 * h_n + j];
        const double c_tanh = std::tanh(tr.c[t + 1][j]);

        const double dci = dh[j] * o_g * (1.0 - c_tanh * c_tanh) + dc[j];
        da[j] = dci * g_g * i_g * (1.0 - i_g);
        da[h_n + j] = dci * tr.c[t][j] * f_g * (1.0 - f_g);
        da[2 * h_n + j] = dh[j] * c_tanh * o_g * (1.0 - o_g);
        da[3 * h_n + j] = dci * i_g * (1.0 - g_g * g_g);
        dc[j] = dci * f_g;
      }
    }

    const int x = window[t];
    std::fill(dh.begin(), dh.end(), 0.0);
    for (int gi = 0; gi < l.gates; ++gi) {
      const double d = da[gi];
      g[l.b_h + gi] += d;
      g[l.w_xh + static_cast<std::size_t>(x) * l.gates + gi] += d;
      for (int j = 0; j < h_n; ++j) {
        g[l.w_hh + static_cast<std::size_t>(j) * l.gates + gi] += d * tr.h[t][j];
        dh[j] += p[l.w_hh + static_cast<std::size_t>(j) * l.gates + gi] * d;
      }
    }
  }
  return grad;
}

}  // namespace

RnnModel init_rnn(int n_classes, int hidden, std::uint64_t seed, CellKind cell) {
  RnnModel m;
  m.cell = cell;
  m.n_classes = n_classes;
  m.hidden = hidden;
  m.params.resize(layout_of(cell, n_classes, hidden).total);
  Rng rng(seed);
  for (double& p : m.params) p = rng.uniform(-0.1, 0.1);
  return m;
}

std::vector<double> rnn_forward(const RnnModel& model, const std::vector<int>& window) {
  return forward_trace(model, window).probs;
}

double rnn_loss(const RnnModel& model, const std::vector<int>& window, int label) {
  const auto probs = rnn_forward(model, window);
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));
}

RnnTrainResult train_rnn(const WindowedSet& ws, const RnnConfig& config) {
  if (ws.size() == 0) throw EmptySetError();

  RnnTrainResult result;
  result.model = init_rnn(ws.n_classes, config.hidden, config.seed, config.cell);
  auto& m = result.model;

  Rng rng(mix_seed(config.seed, 0x7274));
  std::vector<int> order(ws.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (const int i : order) {
      const auto& window = ws.inputs[static_cast<std::size_t>(i)];
      const int label = ws.labels[static_cast<std::size_t>(i)];

      const Trace tr = forward_trace(m, window);
      loss_sum += -std::log(std::max(tr.probs[static_cast<std::size_t>(label)], 1e-300));
      auto grad = backward(m, window, label, tr);

      double norm_sq = 0.0;
      for (const double gv : grad) norm_sq += gv * gv;
      const double norm = std::sqrt(norm_sq);
      const double scale =
          norm > config.clip_norm && norm > 0.0 ? config.clip_norm / norm : 1.0;

      for (std::size_t k = 0; k < m.params.size(); ++k) {
        m.params[k] -= config.lr * scale * grad[k];
      }
    }
    result.loss_trace.push_back(loss_sum / static_cast<double>(ws.size()));
  }
  return result;
}

double rnn_gradient_check(const RnnModel& model, const std::vector<int>& window, int label,
                          double epsilon, int n_probes, std::uint64_t seed) {
  const Trace tr = forward_trace(model, window);
  const auto analytic = backward(model, window, label, tr);

  RnnModel probe = model;
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < n_probes; ++k) {
    const std::size_t idx = rng.index(probe.params.size());
    const double saved = probe.params[idx];

    probe.params[idx] = saved + epsilon;
    const double up = rnn_loss(probe, window, label);
    probe.params[idx] = saved - epsilon;
    const double down = rnn_loss(probe, window, label);
    probe.params[idx] = saved;

    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::abs(analytic[idx]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[idx] - numeric) / denom);
  }
  return worst;
}

}  // namespace mobpat::predict
