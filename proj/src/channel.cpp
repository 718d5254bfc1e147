// SPDX-License-Identifier: Apache-2.0

#include "hmasim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hmasim/rng.hpp"

namespace hmasim {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

}  // namespace

Eigen::MatrixXd receive_correlation(const std::vector<Eigen::Vector3d>& positions,
                                    double wavelength) {
  const int n = static_cast<int>(positions.size());
  Eigen::MatrixXd sigma(n, n);
  for (int i = 0; i < n; ++i) {
    sigma(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = (positions[i] - positions[j]).norm();
      const double v = sinc(2.0 * d / wavelength);
      sigma(i, j) = v;
      sigma(j, i) = v;
    }
  }
  return sigma;
}

Eigen::MatrixXd receive_correlation(const ArrayLayout& layout) {
  return receive_correlation(layout.hms_positions, layout.wavelength);
}

double path_loss(double distance_m, double fc_ghz) {
  if (distance_m < 25.0) {
    throw std::domain_error("path_loss: distance inside the 25 m exclusion zone");
  }
  const double pl_db =
      36.7 * std::log10(distance_m) + 22.7 + 26.0 * std::log10(fc_ghz);
  return std::pow(10.0, -pl_db / 10.0);
}

std::vector<Eigen::Vector2d> drop_users(int k, double cell_radius,
                                        double exclusion, std::uint64_t seed) {
  const double apothem = cell_radius * std::sqrt(3.0) / 2.0;
  if (exclusion >= apothem) {
    throw std::invalid_argument("drop_users: exclusion zone covers the hexagon");
  }
  // Hexagon with a vertex on +x: inside iff |p . n| <= apothem for the three
  // side normals at 30, 90, 150 degrees.
  const double nx30 = std::cos(kPi / 6.0);
  const double ny30 = std::sin(kPi / 6.0);
  auto inside_hexagon = [&](double x, double y) {
    return std::abs(y) <= apothem &&
           std::abs(x * nx30 + y * ny30) <= apothem &&
           std::abs(-x * nx30 + y * ny30) <= apothem;
  };

  Rng rng(seed);
  std::vector<Eigen::Vector2d> users;
  users.reserve(static_cast<std::size_t>(std::max(k, 0)));
  while (static_cast<int>(users.size()) < k) {
    const double x = rng.uniform(-cell_radius, cell_radius);
    const double y = rng.uniform(-cell_radius, cell_radius);
    if (!inside_hexagon(x, y)) continue;
    if (x * x + y * y < exclusion * exclusion) continue;
    users.emplace_back(x, y);
  }
  return users;
}

ChannelSampler::ChannelSampler(std::vector<Eigen::Vector3d> positions,
                               double wavelength, double fc_ghz,
                               bool literal_kronecker)
    : fc_ghz_(fc_ghz) {
  sigma_rx_ = receive_correlation(positions, wavelength);
  if (literal_kronecker) {
    rx_mixer_ = sigma_rx_;
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_rx_);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("ChannelSampler: eigendecomposition failed");
  }
  Eigen::VectorXd evals = eig.eigenvalues();
  const double emax = std::max(1.0, evals.maxCoeff());
  if (evals.minCoeff() < -1e-9 * emax) {
    throw std::runtime_error("ChannelSampler: correlation matrix is not PSD");
  }
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    evals[i] = std::sqrt(std::max(evals[i], 0.0));
  }
  rx_mixer_ = eig.eigenvectors() * evals.asDiagonal() *
              eig.eigenvectors().transpose();
}

ChannelRealization ChannelSampler::draw(const std::vector<Eigen::Vector2d>& users,
                                        std::uint64_t seed) const {
  Eigen::VectorXd beta(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    beta[static_cast<Eigen::Index>(u)] = path_loss(users[u].norm(), fc_ghz_);
  }
  ChannelRealization real = draw_with_gains(beta, seed);
  real.user_positions = users;
  return real;
}

ChannelRealization ChannelSampler::draw_with_gains(const Eigen::VectorXd& beta,
                                                   std::uint64_t seed) const {
  const int n = static_cast<int>(sigma_rx_.rows());
  const int k = static_cast<int>(beta.size());

  ChannelRealization real;
  real.sigma_rx = sigma_rx_;
  real.beta = beta;

  // Fill order is row-major so results are reproducible across builds.
  Rng rng(seed);
  Eigen::MatrixXcd iid(n, k);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < k; ++c) {
      iid(r, c) = rng.cnormal();
    }
  }
  real.h = rx_mixer_ * iid * beta.cwiseSqrt().asDiagonal();
  return real;
}

ChannelRealization draw_channel(const ArrayLayout& layout,
                                const std::vector<Eigen::Vector2d>& users,
                                double fc_ghz, std::uint64_t seed,
                                bool literal_kronecker) {
  ChannelSampler sampler(layout.hms_positions, layout.wavelength, fc_ghz,
                         literal_kronecker);
  return sampler.draw(users, seed);
}

double antenna_noise_power(double a_eff, double wavelength, double bandwidth,
                           double temp_env) {
  return kBoltzmann * temp_env * bandwidth * (a_eff / (wavelength * wavelength)) *
         2.0 * kPi;
}

std::pair<double, double> friis_cascade(const std::vector<NoiseStage>& stages) {
  if (stages.empty()) {
    throw std::invalid_argument("friis_cascade: empty stage list");
  }
  for (const auto& s : stages) {
    if (s.gain <= 0.0 || s.noise_factor < 1.0) {
      throw std::invalid_argument("friis_cascade: invalid stage");
    }
  }
  double f_total = stages.front().noise_factor;
  double g_running = stages.front().gain;
  for (std::size_t i = 1; i < stages.size(); ++i) {
    f_total += (stages[i].noise_factor - 1.0) / g_running;
    g_running *= stages[i].gain;
  }
  return {f_total, g_running};
}

double rf_noise_power(const std::vector<NoiseStage>& stages, double bandwidth,
                      double temp_bs) {
  const auto [f_total, g_total] = friis_cascade(stages);
  (void)g_total;  // input-referred, RF gain fixed at 1
  return (f_total - 1.0) * kBoltzmann * temp_bs * bandwidth;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  std::ostringstream oss;
  oss << path << ": line " << line << ": " << what;
  throw std::runtime_error(oss.str());
}

}  // namespace

std::vector<ChannelRealization> import_channels(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("import_channels: cannot open " + path);
  }

  std::vector<ChannelRealization> out;
  std::string line;
  int line_no = 0;

  auto next_content_line = [&](std::string& dst) -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      dst = line;
      return true;
    }
    return false;
  };

  std::string cur;
  while (next_content_line(cur)) {
    int n = 0, k = 0;
    {
      std::istringstream hdr(cur);
      if (!(hdr >> n >> k) || n < 1 || k < 1) {
        parse_fail(path, line_no, "expected header 'N K'");
      }
    }
    ChannelRealization real;
    real.h.resize(n, k);
    for (int r = 0; r < n; ++r) {
      if (!next_content_line(cur) || cur == "---") {
        parse_fail(path, line_no, "missing channel row " + std::to_string(r + 1) +
                                       " of " + std::to_string(n));
      }
      std::istringstream row(cur);
      for (int c = 0; c < k; ++c) {
        double re = 0.0, im = 0.0;
        if (!(row >> re >> im)) {
          parse_fail(path, line_no, "expected " + std::to_string(2 * k) +
                                        " values in channel row " +
                                        std::to_string(r + 1));
        }
        real.h(r, c) = {re, im};
      }
    }

    // Optional beta line, then an optional "---" separator.
    bool has_beta = false;
    if (next_content_line(cur)) {
      if (cur.rfind("beta:", 0) == 0) {
        std::istringstream bl(cur.substr(5));
        real.beta.resize(k);
        for (int c = 0; c < k; ++c) {
          if (!(bl >> real.beta[c])) {
            parse_fail(path, line_no, "expected K beta values");
          }
        }
        has_beta = true;
        if (next_content_line(cur) && cur != "---") {
          parse_fail(path, line_no, "expected '---' separator");
        }
      } else if (cur != "---") {
        parse_fail(path, line_no, "expected '---' separator or 'beta:' line");
      }
    }
    if (!has_beta) {
      // Default per-user gain: mean per-antenna power of the column.
      real.beta = real.h.colwise().squaredNorm().transpose() / n;
    }
    out.push_back(std::move(real));
  }
  if (out.empty()) {
    throw std::runtime_error("import_channels: no realizations in " + path);
  }
  return out;
}

void export_channels(const std::string& path,
                     const std::vector<ChannelRealization>& list) {
  std::ofstream outf(path);
  if (!outf) {
    throw std::runtime_error("export_channels: cannot open " + path);
  }
  outf.precision(17);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& real = list[i];
    outf << real.h.rows() << ' ' << real.h.cols() << '\n';
    for (Eigen::Index r = 0; r < real.h.rows(); ++r) {
      for (Eigen::Index c = 0; c < real.h.cols(); ++c) {
        if (c > 0) outf << ' ';
        outf << real.h(r, c).real() << ' ' << real.h(r, c).imag();
      }
      outf << '\n';
    }
    if (real.beta.size() == real.h.cols()) {
      outf << "beta:";
      for (Eigen::Index c = 0; c < real.beta.size(); ++c) {
        outf << ' ' << real.beta[c];
      }
      outf << '\n';
    }
    if (i + 1 < list.size()) outf << "---\n";
  }
}

}  // namespace hmasim
