#include "drn/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace drn {

namespace {

constexpr int64_t kWidth = 640;
constexpr int64_t kHeight = 400;
constexpr int64_t kMargin = 32;

const std::array<std::array<float, 3>, 4> kPalette = {{
    {0.85f, 0.33f, 0.10f},
    {0.00f, 0.45f, 0.74f},
    {0.47f, 0.67f, 0.19f},
    {0.49f, 0.18f, 0.56f},
}};

class Canvas {
public:
    Canvas() : pixels_(torch::ones({3, kHeight, kWidth})) {}

    void dot(int64_t x, int64_t y, const std::array<float, 3> &c)
    {
        if (x < 0 || y < 0 || x >= kWidth || y >= kHeight) return;
        auto acc = pixels_.accessor<float, 3>();
        for (int ch = 0; ch < 3; ++ch) acc[ch][y][x] = c[static_cast<size_t>(ch)];
    }

    void line(double x0, double y0, double x1, double y1, const std::array<float, 3> &c)
    {
        const auto steps = static_cast<int64_t>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) + 1;
        for (int64_t i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(steps);
            dot(std::lround(x0 + t * (x1 - x0)), std::lround(y0 + t * (y1 - y0)), c);
        }
    }

    void rect(int64_t x0, int64_t y0, int64_t x1, int64_t y1, const std::array<float, 3> &c)
    {
        for (int64_t y = std::max<int64_t>(0, y0); y < std::min(kHeight, y1); ++y) {
            for (int64_t x = std::max<int64_t>(0, x0); x < std::min(kWidth, x1); ++x) dot(x, y, c);
        }
    }

    void axes()
    {
        const std::array<float, 3> black{0.f, 0.f, 0.f};
        line(kMargin, kMargin, kMargin, kHeight - kMargin, black);
        line(kMargin, kHeight - kMargin, kWidth - kMargin, kHeight - kMargin, black);
    }

    void save(const std::filesystem::path &path) const { save_png(ImageTensor(pixels_, Range::unit), path); }

private:
    torch::Tensor pixels_;
};

}  // namespace

void plot_loss_curves(const std::vector<std::pair<std::string, std::vector<IterationLog>>> &logs,
                      const std::filesystem::path &path)
{
    Canvas canvas;
    canvas.axes();
    double lo = INFINITY, hi = -INFINITY;
    for (const auto &[name, log] : logs) {
        for (const auto &e : log) {
            if (std::isfinite(e.l1) && e.l1 > 0.0) {
                lo = std::min(lo, std::log10(e.l1));
                hi = std::max(hi, std::log10(e.l1));
            }
        }
    }
    if (!std::isfinite(lo)) {
        canvas.save(path);
        return;
    }
    if (hi - lo < 1e-6) hi = lo + 1.0;
    const double plot_w = kWidth - 2 * kMargin, plot_h = kHeight - 2 * kMargin;
    size_t series = 0;
    for (const auto &[name, log] : logs) {
        const auto &colour = kPalette[series++ % kPalette.size()];
        double px = -1, py = -1;
        for (size_t i = 0; i < log.size(); ++i) {
            if (!std::isfinite(log[i].l1) || log[i].l1 <= 0.0) continue;
            const double x = kMargin + plot_w * (log.size() > 1 ? static_cast<double>(i) / (log.size() - 1) : 0.0);
            const double y = kHeight - kMargin - plot_h * (std::log10(log[i].l1) - lo) / (hi - lo);
            if (px >= 0) {
                canvas.line(px, py, x, y, colour);
            } else {
                canvas.dot(std::lround(x), std::lround(y), colour);
            }
            px = x;
            py = y;
        }
    }
    canvas.save(path);
}

void plot_metric_bars(const MetricReport &report, const std::filesystem::path &path)
{
    Canvas canvas;
    canvas.axes();
    // PSNR scaled against 50 dB (infinite values saturate), SSIM against 1.
    auto scaled_psnr = [](double db) { return std::clamp(std::isfinite(db) ? db / 50.0 : 1.0, 0.0, 1.0); };
    const std::array<double, 4> values = {scaled_psnr(report.model.mean_psnr_db),
                                          scaled_psnr(report.baseline.mean_psnr_db),
                                          std::clamp(report.model.mean_ssim, 0.0, 1.0),
                                          std::clamp(report.baseline.mean_ssim, 0.0, 1.0)};
    const int64_t plot_h = kHeight - 2 * kMargin;
    const int64_t slot = (kWidth - 2 * kMargin) / 5;
    for (size_t i = 0; i < values.size(); ++i) {
        const int64_t x0 = kMargin + slot / 2 + static_cast<int64_t>(i) * slot + (i >= 2 ? slot / 2 : 0);
        const int64_t top = kHeight - kMargin - std::lround(values[i] * static_cast<double>(plot_h));
        canvas.rect(x0, top, x0 + slot * 3 / 4, kHeight - kMargin, kPalette[i % 2]);
    }
    canvas.save(path);
}

}  // namespace drn
