#include "output.hpp"

#include "errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

namespace bucktop {

namespace {

std::ofstream open_text(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * v), 0L, 255L));
}

void write_raster(const std::filesystem::path& path, const char* magic, int width, int height,
                  int channels, const std::vector<std::uint8_t>& data) {
  if (width < 1 || height < 1 ||
      data.size() != static_cast<std::size_t>(width) * height * channels)
    throw InvalidArgument("image buffer does not match its dimensions");
  std::ofstream out = open_text(path);
  out << magic << '\n' << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

// White, yellow, red, dark red: low to high.
std::array<double, 3> heat_ramp(double t) {
  static constexpr std::array<std::array<double, 3>, 4> stops = {
      {{1.0, 1.0, 1.0}, {1.0, 0.85, 0.2}, {0.85, 0.1, 0.05}, {0.25, 0.0, 0.0}}};
  t = std::clamp(t, 0.0, 1.0) * 3.0;
  const int i = std::min(2, static_cast<int>(t));
  const double w = t - i;
  std::array<double, 3> c{};
  for (int k = 0; k < 3; ++k) c[k] = (1 - w) * stops[i][k] + w * stops[i + 1][k];
  return c;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_seconds(double v) {
  if (!std::isfinite(v)) return format_number(v);
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 3);
  return std::string(buf.data(), res.ptr);
}

HistoryWriter::HistoryWriter(const std::filesystem::path& path) : out_(open_text(path)) {
  out_ << header() << '\n';
  out_.flush();
}

std::string HistoryWriter::header() {
  return "loop,f,c,lambda1,lambda2,lambda3,lambda4,JKS,g1,kappa,change,t_iter";
}

std::string HistoryWriter::row(const IterationRecord& rec) {
  std::string s = std::to_string(rec.loop);
  auto add = [&](double v) {
    s += ',';
    s += format_number(v);
  };
  add(rec.f);
  add(rec.c);
  for (std::size_t i = 0; i < 4; ++i)
    add(i < rec.lambda.size() ? rec.lambda[i] : std::numeric_limits<double>::quiet_NaN());
  add(rec.jks);
  add(rec.g1);
  add(rec.kappa);
  add(rec.change);
  s += ',';
  s += format_seconds(rec.t_iter);
  return s;
}

void HistoryWriter::write(const IterationRecord& rec) {
  out_ << row(rec) << '\n';
  out_.flush();
  if (!out_) throw IoError("failed writing the iteration history");
}

LambdaHistoryWriter::LambdaHistoryWriter(const std::filesystem::path& path, int n_eig)
    : out_(open_text(path)), n_eig_(n_eig) {
  out_ << "loop";
  for (int i = 1; i <= n_eig_; ++i) out_ << ",lambda" << i;
  out_ << '\n';
}

void LambdaHistoryWriter::write(const IterationRecord& rec) {
  out_ << rec.loop;
  for (int i = 0; i < n_eig_; ++i)
    out_ << ',' << format_number(i < static_cast<int>(rec.lambda.size()) ? rec.lambda[i]
                                                                          : std::nan(""));
  out_ << '\n';
  out_.flush();
  if (!out_) throw IoError("failed writing the load factor history");
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& gray) {
  write_raster(path, "P5", width, height, 1, gray);
}

void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& rgb) {
  write_raster(path, "P6", width, height, 3, rgb);
}

std::vector<std::uint8_t> density_pixels(const GridModel& grid, std::span<const double> x_phys) {
  const int w = grid.nelx(), h = grid.nely();
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      px[static_cast<std::size_t>(r) * w + c] = to_byte(1.0 - x_phys[grid.element(r, c)]);
  return px;
}

std::vector<std::uint8_t> stress_pixels(const GridModel& grid, const ElementOperators& ops,
                                        const Interpolation& interp, std::span<const double> x_phys,
                                        std::span<const double> u) {
  const Eigen::MatrixXd s = centroid_stress(grid, ops, u);
  const Index m = grid.num_elements();
  std::vector<double> minor(m);
  double peak = 0.0;
  for (Index e = 0; e < m; ++e) {
    const double sx = s(e, 0), sy = s(e, 1), txy = s(e, 2);
    const double mid = 0.5 * (sx + sy);
    const double rad = std::hypot(0.5 * (sx - sy), txy);
    // The principal value of largest magnitude keeps the sign information.
    const double lo = mid - rad, hi = mid + rad;
    minor[e] = interp.ek(x_phys[e]) * (std::abs(lo) >= std::abs(hi) ? lo : hi);
    peak = std::max(peak, std::abs(minor[e]));
  }
  const int w = grid.nelx(), h = grid.nely();
  std::vector<std::uint8_t> px(static_cast<std::size_t>(3) * w * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Index e = grid.element(r, c);
      const double t = peak > 0 ? std::sqrt(std::abs(minor[e]) / peak) : 0.0;
      std::array<double, 3> col = minor[e] < 0 ? std::array<double, 3>{1 - t, 1 - 0.6 * t, 1.0}
                                               : std::array<double, 3>{1.0, 1 - 0.8 * t, 1 - t};
      const double a = x_phys[e];
      const std::size_t p = 3 * (static_cast<std::size_t>(r) * w + c);
      for (int k = 0; k < 3; ++k) px[p + k] = to_byte(a * col[k] + (1 - a));
    }
  }
  return px;
}

std::vector<std::uint8_t> mode_pixels(const GridModel& grid, const ElementOperators& ops,
                                      const Interpolation& interp, std::span<const double> x_phys,
                                      std::span<const double> phi) {
  const Eigen::MatrixXd ue = gather(grid, phi);
  const Index m = grid.num_elements();
  std::vector<double> sed(m);
  double peak = 0.0;
  for (Index e = 0; e < m; ++e) {
    sed[e] = interp.ek(x_phys[e]) * ue.row(e).dot(ops.k0 * ue.row(e).transpose());
    peak = std::max(peak, sed[e]);
  }
  constexpr double decades = 6.0;
  const int w = grid.nelx(), h = grid.nely();
  std::vector<std::uint8_t> px(static_cast<std::size_t>(3) * w * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Index e = grid.element(r, c);
      double t = 0.0;
      if (peak > 0 && sed[e] > 0) t = 1.0 + std::log10(sed[e] / peak) / decades;
      const auto col = heat_ramp(t);
      const double a = x_phys[e];
      const std::size_t p = 3 * (static_cast<std::size_t>(r) * w + c);
      for (int k = 0; k < 3; ++k) px[p + k] = to_byte(a * col[k] + (1 - a));
    }
  }
  return px;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  nlohmann::json j;
  j["format"] = "bucktop-checkpoint";
  j["version"] = 1;
  j["preset"] = cp.preset;
  j["nelx"] = cp.nelx;
  j["nely"] = cp.nely;
  j["lx"] = cp.lx;
  j["loop"] = cp.loop;
  j["problem"] = cp.problem;
  j["bounds"] = cp.bounds;
  j["continuation"] = {{"penalK", cp.continuation.penal_k},
                       {"penalG", cp.continuation.penal_g},
                       {"beta", cp.continuation.beta},
                       {"pAgg", cp.continuation.rho}};
  j["eta"] = cp.eta;
  j["passive_solid"] = cp.passive_solid;
  j["passive_void"] = cp.passive_void;
  j["x"] = cp.x;
  std::ofstream out = open_text(path);
  out << j.dump(1) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  Checkpoint cp;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", "") != "bucktop-checkpoint")
      throw ConfigError(path.string() + " is not a checkpoint file");
    cp.preset = j.value("preset", "");
    cp.nelx = j.at("nelx").get<int>();
    cp.nely = j.at("nely").get<int>();
    cp.lx = j.at("lx").get<double>();
    cp.loop = j.value("loop", 0);
    cp.problem = j.value("problem", "");
    cp.bounds = j.value("bounds", std::vector<double>{});
    const auto& c = j.at("continuation");
    cp.continuation = {c.at("penalK").get<double>(), c.at("penalG").get<double>(),
                       c.at("beta").get<double>(), c.at("pAgg").get<double>()};
    cp.eta = j.value("eta", 0.5);
    cp.passive_solid = j.value("passive_solid", std::vector<Index>{});
    cp.passive_void = j.value("passive_void", std::vector<Index>{});
    cp.x = j.at("x").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  if (cp.nelx < 1 || cp.nely < 1 ||
      cp.x.size() != static_cast<std::size_t>(cp.nelx) * static_cast<std::size_t>(cp.nely))
    throw ConfigError("checkpoint " + path.string() + " has inconsistent dimensions");
  return cp;
}

}  // namespace bucktop
