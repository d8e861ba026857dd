#pragma once

#include <string>
#include <vector>

#include "i2gfp/image.hpp"

namespace i2gfp {

// The four standard matting metrics, restricted to a pixel mask. SAD, Grad
// and Conn carry the conventional 1/1000 scaling; MSE is a plain mean.
double sad(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask);
double mse(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask);

// Gaussian-derivative gradient discrepancy (sigma 1.4, taps truncated at
// radius ceil(3*sigma), kernels L2-normalized, replicate borders):
// sum over mask of (|grad p| - |grad g|)^2 / 1000.
double grad_metric(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask);

// Connectivity degradation: thresholds 0,0.1,...,1.0, largest 4-connected
// component of {pred>=t} & {gt>=t}, theta 0.15.
double conn_metric(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask);

struct MetricValues {
  double sad = 0.0;
  double mse = 0.0;
  double grad = 0.0;
  double conn = 0.0;
};

MetricValues compute_metrics(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask);

enum class EvalRegion { Unknown, Full };

struct EvalItem {
  std::string name;
  std::string pred_path;
  std::string gt_path;
  std::string trimap_path;
};

struct MetricReport {
  struct Row {
    std::string name;
    MetricValues values;
  };
  std::vector<Row> per_image;           // ordered by name
  MetricValues aggregate;               // arithmetic mean over successes
  std::vector<std::pair<std::string, std::string>> failures;  // name -> error
};

// Per-image failures are recorded and skipped; the aggregate covers the
// successes.
MetricReport evaluate(const std::vector<EvalItem>& items, EvalRegion region);

std::string report_to_json(const MetricReport& report, EvalRegion region);
std::string report_table(const MetricReport& report);

}  // namespace i2gfp
