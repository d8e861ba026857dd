#include "i2gfp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>

#include <nlohmann/json.hpp>

#include "i2gfp/png_io.hpp"

namespace i2gfp {

namespace {

void require_same(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask) {
  if (pred.height != gt.height || pred.width != gt.width)
    throw ShapeError("metric: pred " + std::to_string(pred.height) + "x" +
                     std::to_string(pred.width) + " vs gt " + std::to_string(gt.height) + "x" +
                     std::to_string(gt.width));
  if (mask.height != pred.height || mask.width != pred.width)
    throw ShapeError("metric: mask dimensions differ from mattes");
}

}  // namespace

double sad(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask) {
  require_same(pred, gt, mask);
  double acc = 0.0;
  for (size_t j = 0; j < pred.data.size(); ++j)
    if (mask.data[j]) acc += std::abs(double(pred.data[j]) - double(gt.data[j]));
  return acc / 1000.0;
}

double mse(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask) {
  require_same(pred, gt, mask);
  double acc = 0.0;
  size_t n = 0;
  for (size_t j = 0; j < pred.data.size(); ++j) {
    if (!mask.data[j]) continue;
    const double d = double(pred.data[j]) - double(gt.data[j]);
    acc += d * d;
    ++n;
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

namespace {

constexpr double kGradSigma = 1.4;

struct GaussTaps {
  std::vector<double> smooth;  // normalized gaussian
  std::vector<double> deriv;   // normalized first derivative
  int radius;
};

// 2-D kernels are outer products smooth x deriv; normalizing each 1-D factor
// to unit L2 norm makes the 2-D kernel L2-normalized as well.
GaussTaps gauss_taps(double sigma) {
  GaussTaps t;
  t.radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int n = 2 * t.radius + 1;
  t.smooth.resize(n);
  t.deriv.resize(n);
  for (int i = -t.radius; i <= t.radius; ++i) {
    const double g = std::exp(-(i * i) / (2.0 * sigma * sigma));
    t.smooth[static_cast<size_t>(i + t.radius)] = g;
    t.deriv[static_cast<size_t>(i + t.radius)] = -i * g;
  }
  auto l2norm = [](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    for (double& x : v) x /= s;
  };
  l2norm(t.smooth);
  l2norm(t.deriv);
  return t;
}

// Horizontal cross-correlation with replicate borders.
std::vector<double> conv_rows(const std::vector<double>& in, int h, int w,
                              const std::vector<double>& taps, int radius) {
  std::vector<double> out(in.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    const double* row = in.data() + static_cast<size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int ix = std::clamp(x + k, 0, w - 1);
        acc += taps[static_cast<size_t>(k + radius)] * row[ix];
      }
      out[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

std::vector<double> conv_cols(const std::vector<double>& in, int h, int w,
                              const std::vector<double>& taps, int radius) {
  std::vector<double> out(in.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int iy = std::clamp(y + k, 0, h - 1);
        acc += taps[static_cast<size_t>(k + radius)] * in[static_cast<size_t>(iy) * w + x];
      }
      out[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

std::vector<double> gradient_magnitude(const AlphaMatte& a, const GaussTaps& t) {
  std::vector<double> in(a.data.begin(), a.data.end());
  const auto gx = conv_cols(conv_rows(in, a.height, a.width, t.deriv, t.radius), a.height, a.width,
                            t.smooth, t.radius);
  const auto gy = conv_rows(conv_cols(in, a.height, a.width, t.deriv, t.radius), a.height, a.width,
                            t.smooth, t.radius);
  std::vector<double> mag(in.size());
  for (size_t j = 0; j < mag.size(); ++j) mag[j] = std::sqrt(gx[j] * gx[j] + gy[j] * gy[j]);
  return mag;
}

}  // namespace

double grad_metric(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask) {
  require_same(pred, gt, mask);
  const GaussTaps taps = gauss_taps(kGradSigma);
  const auto mp = gradient_magnitude(pred, taps);
  const auto mg = gradient_magnitude(gt, taps);
  double acc = 0.0;
  for (size_t j = 0; j < mp.size(); ++j) {
    if (!mask.data[j]) continue;
    const double d = mp[j] - mg[j];
    acc += d * d;
  }
  return acc / 1000.0;
}

namespace {

// Largest 4-connected component of a binary map; size ties resolve to the
// component reached first in raster order. Empty input -> all-zero omega.
std::vector<uint8_t> largest_component(const std::vector<uint8_t>& bin, int h, int w) {
  std::vector<int> label(bin.size(), -1);
  int best_label = -1;
  size_t best_size = 0;
  int next = 0;
  std::deque<int> queue;
  for (int start = 0; start < h * w; ++start) {
    if (!bin[static_cast<size_t>(start)] || label[static_cast<size_t>(start)] >= 0) continue;
    const int cur = next++;
    size_t size = 0;
    label[static_cast<size_t>(start)] = cur;
    queue.push_back(start);
    while (!queue.empty()) {
      const int j = queue.front();
      queue.pop_front();
      ++size;
      const int y = j / w, x = j % w;
      const int nb[4] = {y > 0 ? j - w : -1, y + 1 < h ? j + w : -1, x > 0 ? j - 1 : -1,
                         x + 1 < w ? j + 1 : -1};
      for (int k : nb) {
        if (k < 0 || !bin[static_cast<size_t>(k)] || label[static_cast<size_t>(k)] >= 0) continue;
        label[static_cast<size_t>(k)] = cur;
        queue.push_back(k);
      }
    }
    if (size > best_size) {
      best_size = size;
      best_label = cur;
    }
  }
  std::vector<uint8_t> omega(bin.size(), 0);
  if (best_label >= 0)
    for (size_t j = 0; j < bin.size(); ++j) omega[j] = (label[j] == best_label) ? 1 : 0;
  return omega;
}

constexpr double kConnStep = 0.1;
constexpr double kConnTheta = 0.15;

}  // namespace

double conn_metric(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask) {
  require_same(pred, gt, mask);
  const int h = pred.height, w = pred.width;
  const size_t n = pred.data.size();

  // l = highest threshold whose joint component still contains the pixel.
  std::vector<double> lmap(n, -1.0);
  for (int i = 1; i <= 10; ++i) {
    const double t = i * kConnStep;
    std::vector<uint8_t> bin(n);
    for (size_t j = 0; j < n; ++j)
      bin[j] = (double(pred.data[j]) >= t && double(gt.data[j]) >= t) ? 1 : 0;
    const auto omega = largest_component(bin, h, w);
    for (size_t j = 0; j < n; ++j)
      if (lmap[j] < 0.0 && !omega[j]) lmap[j] = (i - 1) * kConnStep;
  }
  for (double& v : lmap)
    if (v < 0.0) v = 1.0;

  double acc = 0.0;
  for (size_t j = 0; j < n; ++j) {
    if (!mask.data[j]) continue;
    const double dp = double(pred.data[j]) - lmap[j];
    const double dg = double(gt.data[j]) - lmap[j];
    const double phi_p = 1.0 - (dp >= kConnTheta ? dp : 0.0);
    const double phi_g = 1.0 - (dg >= kConnTheta ? dg : 0.0);
    acc += std::abs(phi_p - phi_g);
  }
  return acc / 1000.0;
}

MetricValues compute_metrics(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask) {
  MetricValues v;
  v.sad = sad(pred, gt, mask);
  v.mse = mse(pred, gt, mask);
  v.grad = grad_metric(pred, gt, mask);
  v.conn = conn_metric(pred, gt, mask);
  return v;
}

MetricReport evaluate(const std::vector<EvalItem>& items, EvalRegion region) {
  std::vector<EvalItem> sorted = items;
  std::sort(sorted.begin(), sorted.end(),
            [](const EvalItem& a, const EvalItem& b) { return a.name < b.name; });

  MetricReport report;
  for (const auto& item : sorted) {
    try {
      const AlphaMatte pred = load_alpha_png(item.pred_path);
      const AlphaMatte gt = load_alpha_png(item.gt_path);
      Mask mask;
      if (region == EvalRegion::Full) {
        mask = Mask::full(gt.height, gt.width);
      } else {
        const Trimap trimap = load_trimap_png(item.trimap_path);
        if (trimap.height != gt.height || trimap.width != gt.width)
          throw ShapeError("trimap dimensions differ from ground truth");
        mask = unknown_mask(trimap);
      }
      report.per_image.push_back({item.name, compute_metrics(pred, gt, mask)});
    } catch (const std::exception& e) {
      report.failures.emplace_back(item.name, e.what());
    }
  }

  if (!report.per_image.empty()) {
    for (const auto& row : report.per_image) {
      report.aggregate.sad += row.values.sad;
      report.aggregate.mse += row.values.mse;
      report.aggregate.grad += row.values.grad;
      report.aggregate.conn += row.values.conn;
    }
    const double n = static_cast<double>(report.per_image.size());
    report.aggregate.sad /= n;
    report.aggregate.mse /= n;
    report.aggregate.grad /= n;
    report.aggregate.conn /= n;
  }
  return report;
}

std::string report_to_json(const MetricReport& report, EvalRegion region) {
  nlohmann::json j;
  j["region"] = region == EvalRegion::Full ? "full" : "unknown";
  j["aggregate"] = {{"sad", report.aggregate.sad},
                    {"mse", report.aggregate.mse},
                    {"grad", report.aggregate.grad},
                    {"conn", report.aggregate.conn},
                    {"images", report.per_image.size()}};
  j["images"] = nlohmann::json::array();
  for (const auto& row : report.per_image) {
    j["images"].push_back({{"name", row.name},
                           {"sad", row.values.sad},
                           {"mse", row.values.mse},
                           {"grad", row.values.grad},
                           {"conn", row.values.conn}});
  }
  j["failures"] = nlohmann::json::array();
  for (const auto& [name, err] : report.failures)
    j["failures"].push_back({{"name", name}, {"error", err}});
  return j.dump(2);
}

std::string report_table(const MetricReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-32s %10s %10s %10s %10s\n", "image", "SAD", "MSE", "Grad",
                "Conn");
  os << line;
  for (const auto& row : report.per_image) {
    std::snprintf(line, sizeof(line), "%-32s %10.4f %10.6f %10.4f %10.4f\n", row.name.c_str(),
                  row.values.sad, row.values.mse, row.values.grad, row.values.conn);
    os << line;
  }
  std::snprintf(line, sizeof(line), "%-32s %10.4f %10.6f %10.4f %10.4f\n", "mean",
                report.aggregate.sad, report.aggregate.mse, report.aggregate.grad,
                report.aggregate.conn);
  os << line;
  for (const auto& [name, err] : report.failures) os << "FAILED " << name << ": " << err << "\n";
  return os.str();
}

}  // namespace i2gfp
