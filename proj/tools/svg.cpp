#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "locoman/kinematics.hpp"

namespace locoman::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Bounds {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = hi = 0.0;
    if (hi - lo < 1e-9) {
      lo -= 0.5 * std::max(1e-3, std::abs(lo));
      hi += 0.5 * std::max(1e-3, std::abs(hi));
    }
  }
};

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", const char* extra = "") {
  return "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" text-anchor=\"" + anchor + "\"" + extra + ">" + escape(s) +
         "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2, const char* style) {
  return "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" + fmt(y2) + "\" " +
         style + "/>\n";
}

}  // namespace

std::string line_plot_svg(const LinePlot& plot) {
  Bounds bx, by;
  for (const Series& s : plot.series) {
    for (double v : s.x) bx.add(v);
    for (double v : s.y) by.add(v);
  }
  bx.settle();
  by.settle();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - bx.lo) / (bx.hi - bx.lo) * pw; };
  auto sy = [&](double v) { return kTop + (by.hi - v) / (by.hi - by.lo) * ph; };

  std::string out = header(kWidth, kHeight);
  out += text(kWidth / 2, 22, plot.title, "middle", " font-size=\"15\"");
  out += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = bx.lo + (bx.hi - bx.lo) * i / 5.0;
    const double fy = by.lo + (by.hi - by.lo) * i / 5.0;
    out += line(sx(fx), kTop + ph, sx(fx), kTop + ph + 5, "stroke=\"black\"");
    out += text(sx(fx), kTop + ph + 18, tick_label(fx));
    out += line(kLeft - 5, sy(fy), kLeft, sy(fy), "stroke=\"black\"");
    out += line(kLeft, sy(fy), kLeft + pw, sy(fy), "stroke=\"#dddddd\"");
    out += text(kLeft - 8, sy(fy) + 4, tick_label(fy), "end");
  }
  out += text(kLeft + pw / 2, kHeight - 12, plot.x_label);
  out += text(16, kTop + ph / 2, plot.y_label, "middle",
              (" transform=\"rotate(-90 16 " + fmt(kTop + ph / 2) + ")\"").c_str());

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const Series& s = plot.series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    std::string pts;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts += (pts.empty() ? "" : " ") + fmt(sx(s.x[i])) + "," + fmt(sy(s.y[i]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    const double ly = kTop + 16 + 18 * static_cast<double>(k);
    out += line(kLeft + pw + 12, ly - 4, kLeft + pw + 32, ly - 4,
                ("stroke=\"" + std::string(color) + "\" stroke-width=\"2\"").c_str());
    out += text(kLeft + pw + 38, ly, s.label, "start");
  }
  out += "</svg>\n";
  return out;
}

std::string pose_svg(const PoseDecision& pose, const Vec3& grip, const RobotModel& model, const std::string& title) {
  // World x-z plane, 1 m = 400 px, ground at the bottom.
  const double scale = 400.0;
  const double w = 560.0, h = 360.0;
  const double x0 = 160.0 - scale * pose.pos.x();
  const double ground = h - 40.0;
  auto px = [&](const Vec3& p) { return x0 + scale * p.x(); };
  auto pz = [&](const Vec3& p) { return ground - scale * p.z(); };

  const Mat3 rot = rot_zyx(pose.euler);
  std::string out = header(w, h);
  out += text(w / 2, 22, title, "middle", " font-size=\"15\"");
  out += line(0, ground, w, ground, "stroke=\"#555555\" stroke-width=\"2\"");

  const Vec3 front = pose.pos + rot * Vec3(0.28, 0.0, 0.0);
  const Vec3 back = pose.pos + rot * Vec3(-0.28, 0.0, 0.0);
  out += line(px(back), pz(back), px(front), pz(front), "stroke=\"#333333\" stroke-width=\"14\" stroke-linecap=\"round\"");
  for (std::size_t i = 0; i < kNumLegs; i += 2) {
    const Vec3 hip = pose.pos + rot * model.hip_offset[i];
    Vec3 foot = pose.pos + model.hip_offset[i];
    foot.z() = 0.0;
    out += line(px(hip), pz(hip), px(foot), pz(foot), "stroke=\"#777777\" stroke-width=\"5\"");
  }
  const EndEffectorPose fk = arm_fk(pose.pos, pose.euler, pose.q_arm, model);
  const Vec3 mount = pose.pos + rot * model.arm_mount;
  out += line(px(mount), pz(mount), px(fk.position), pz(fk.position), "stroke=\"#1f77b4\" stroke-width=\"5\"");
  out += "<circle cx=\"" + fmt(px(grip)) + "\" cy=\"" + fmt(pz(grip)) + "\" r=\"6\" fill=\"#d62728\"/>\n";
  out += "<circle cx=\"" + fmt(px(pose.pos)) + "\" cy=\"" + fmt(pz(pose.pos)) + "\" r=\"4\" fill=\"white\"/>\n";

  char caption[160];
  std::snprintf(caption, sizeof caption, "p_z %.3f m   pitch %.3f rad   q_arm %.3f rad", pose.pos.z(), pose.euler.y(),
                pose.q_arm);
  out += text(w / 2, h - 12, caption);
  out += "</svg>\n";
  return out;
}

}  // namespace locoman::cli
