#ifndef DRN_PLOT_HPP
#define DRN_PLOT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "drn/metrics.hpp"
#include "drn/training.hpp"

namespace drn {

// Plain rasterised charts, no text: one coloured polyline per named log
// (L1 on a log axis, x scaled to each log's own length), and paired bars for
// model vs input-copy PSNR and SSIM.
void plot_loss_curves(const std::vector<std::pair<std::string, std::vector<IterationLog>>> &logs,
                      const std::filesystem::path &path);
void plot_metric_bars(const MetricReport &report, const std::filesystem::path &path);

}  // namespace drn

#endif
