#include "flowdepth/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace flowdepth {

namespace {

[[noreturn]] void format_error(const std::string& path, const std::string& what,
                               long long byte_offset) {
  throw std::runtime_error(path + ": " + what + " at byte " +
                           std::to_string(byte_offset));
}

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
         (v >> 24);
}

float load_float_le(const unsigned char* p, bool swap) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if (swap) bits = byteswap32(bits);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

// Reads one whitespace-delimited token, tracking the stream offset.
std::string next_token(std::istream& in) {
  std::string tok;
  in >> tok;
  return tok;
}

std::ifstream open_input(const std::string& path, bool binary = true) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  return in;
}

std::ofstream open_output(const std::string& path, bool binary = true) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

}  // namespace

Raster<double> read_pfm(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string magic = next_token(in);
  if (magic != "Pf" && magic != "PF")
    format_error(path, "not a PFM file (bad magic)", 0);
  const int channels = magic == "PF" ? 3 : 1;

  int w = 0, h = 0;
  double scale = 0.0;
  if (!(in >> w >> h) || w < 1 || h < 1)
    format_error(path, "malformed PFM dimensions", (long long)in.tellg());
  if (!(in >> scale) || scale == 0.0 || !std::isfinite(scale))
    format_error(path, "malformed PFM scale", (long long)in.tellg());
  in.get();  // single whitespace byte separating header and payload
  const long long payload_start = in.tellg();

  const size_t count = size_t(w) * h * channels;
  std::vector<unsigned char> bytes(count * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (size_t(in.gcount()) != bytes.size())
    format_error(path, "truncated PFM payload",
                 payload_start + (long long)in.gcount());

  const bool swap = scale > 0.0;  // positive scale marks big-endian payloads
  Raster<double> raster(w, h, channels);
  for (int row = 0; row < h; ++row) {
    const int y = h - 1 - row;  // rows are stored bottom to top
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) {
        const size_t i = (size_t(row) * w + x) * channels + c;
        raster.at(x, y, c) = load_float_le(&bytes[i * 4], swap);
      }
  }
  return raster;
}

void write_pfm(const std::string& path, const Raster<double>& raster) {
  if (raster.channels() != 1 && raster.channels() != 3)
    throw std::invalid_argument(path + ": PFM holds 1 or 3 channels");
  const int w = raster.width(), h = raster.height(), c = raster.channels();

  char header[64];
  const int header_len = std::snprintf(header, sizeof(header), "%s\n%d %d\n-1.0\n",
                                       c == 3 ? "PF" : "Pf", w, h);
  // Reject non-finite values before touching the file.
  for (int row = 0; row < h; ++row) {
    const int y = h - 1 - row;
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k)
        if (!std::isfinite(raster.at(x, y, k)))
          format_error(path, "non-finite value on write",
                       header_len + (((long long)row * w + x) * c + k) * 4);
  }

  std::ofstream out = open_output(path);
  out.write(header, header_len);
  std::vector<unsigned char> bytes(size_t(w) * c * 4);
  for (int row = 0; row < h; ++row) {
    const int y = h - 1 - row;
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) {
        const float f = float(raster.at(x, y, k));
        std::memcpy(&bytes[(size_t(x) * c + k) * 4], &f, 4);
      }
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

Raster<double> read_pfm_stacked(const std::string& path, int channels) {
  Raster<double> flat = read_pfm(path);
  if (channels < 1 || flat.channels() != 1 || flat.height() % channels != 0)
    throw std::runtime_error(path + ": not a " + std::to_string(channels) +
                             "-channel stacked raster");
  const int h = flat.height() / channels, w = flat.width();
  Raster<double> raster(w, h, channels);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        raster.at(x, y, c) = flat.at(x, c * h + y);
  return raster;
}

void write_pfm_stacked(const std::string& path, const Raster<double>& raster) {
  const int w = raster.width(), h = raster.height(), c = raster.channels();
  Raster<double> flat(w, h * c, 1);
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        flat.at(x, k * h + y) = raster.at(x, y, k);
  write_pfm(path, flat);
}

ImageRaster read_ppm(const std::string& path) {
  std::ifstream in = open_input(path);
  auto skip_space_and_comments = [&in]() {
    int ch;
    while ((ch = in.peek()) != EOF) {
      if (ch == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
  };

  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '6') format_error(path, "not a P6 PPM (bad magic)", 0);
  skip_space_and_comments();
  int w = 0, h = 0, maxval = 0;
  if (!(in >> w) || w < 1) format_error(path, "malformed PPM width", (long long)in.tellg());
  skip_space_and_comments();
  if (!(in >> h) || h < 1) format_error(path, "malformed PPM height", (long long)in.tellg());
  skip_space_and_comments();
  if (!(in >> maxval) || maxval != 255)
    format_error(path, "PPM maxval must be 255", (long long)in.tellg());
  in.get();  // single whitespace before payload
  const long long payload_start = in.tellg();

  std::vector<unsigned char> bytes(size_t(w) * h * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (size_t(in.gcount()) != bytes.size())
    format_error(path, "truncated PPM payload",
                 payload_start + (long long)in.gcount());

  ImageRaster image(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        image.at(x, y, c) = bytes[(size_t(y) * w + x) * 3 + c] / 255.0;
  return image;
}

void write_ppm(const std::string& path, const ImageRaster& image) {
  if (image.channels() != 3)
    throw std::invalid_argument(path + ": PPM needs a 3-channel raster");
  std::ofstream out = open_output(path);
  out << "P6\n" << image.width() << " " << image.height() << "\n255\n";
  std::vector<unsigned char> bytes(size_t(image.width()) * 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = image.at(x, y, c);
        if (!std::isfinite(v))
          throw std::runtime_error(path + ": non-finite value on write");
        const double q = std::floor(v * 255.0 + 0.5);  // round half up
        bytes[size_t(x) * 3 + c] =
            (unsigned char)(q < 0.0 ? 0.0 : (q > 255.0 ? 255.0 : q));
      }
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

CameraFile read_camera_file(const std::string& path) {
  std::ifstream in = open_input(path, false);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v;
    while (ls >> v) values.push_back(v);
  }
  if (values.size() != 18)
    throw std::runtime_error(path +
                             ": camera file needs 18 numbers (intrinsics + [R|t])");

  CameraFile cam;
  const int w = int(values[4]), h = int(values[5]);
  cam.intrinsics = CameraIntrinsics(values[0], values[1], values[2], values[3], w, h);
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
  for (int r = 0; r < 3; ++r) {
    R(r, 0) = values[6 + 4 * r + 0];
    R(r, 1) = values[6 + 4 * r + 1];
    R(r, 2) = values[6 + 4 * r + 2];
    t(r) = values[6 + 4 * r + 3];
  }
  cam.transform = RigidTransform::from_parts(R, t);
  return cam;
}

void write_camera_file(const std::string& path, const CameraIntrinsics& K,
                       const RigidTransform& T) {
  std::ofstream out = open_output(path, false);
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %d %d\n", K.fx, K.fy,
                K.cx, K.cy, K.width, K.height);
  out << buf;
  for (int r = 0; r < 3; ++r) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n",
                  T.rotation(r, 0), T.rotation(r, 1), T.rotation(r, 2),
                  T.translation(r));
    out << buf;
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

ResidualRefiner read_refiner(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    format_error(path, "missing refiner header", 0);
  int hidden = 0;
  if (std::sscanf(line.c_str(), "refiner v1 %d", &hidden) != 1 || hidden < 1)
    format_error(path, "malformed refiner header", 0);

  ResidualRefiner r(hidden);
  const long long payload_start = in.tellg();
  const size_t count = r.parameter_count();
  std::vector<unsigned char> bytes(count * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (size_t(in.gcount()) != bytes.size())
    format_error(path, "truncated refiner payload",
                 payload_start + (long long)in.gcount());

  size_t i = 0;
  auto take = [&]() { return double(load_float_le(&bytes[4 * i++], false)); };
  for (double& v : r.conv1_w) v = take();
  for (double& v : r.conv1_b) v = take();
  for (double& v : r.conv2_w) v = take();
  r.conv2_b = take();
  if (!r.finite())
    throw std::runtime_error(path + ": refiner parameters are not finite");
  return r;
}

void write_refiner(const std::string& path, const ResidualRefiner& refiner) {
  if (refiner.hidden < 1)
    throw std::invalid_argument(path + ": uninitialized refiner");
  if (!refiner.finite())
    throw std::runtime_error(path + ": non-finite refiner parameters on write");
  std::ofstream out = open_output(path);
  out << "refiner v1 " << refiner.hidden << "\n";
  auto put = [&out](double v) {
    const float f = float(v);
    out.write(reinterpret_cast<const char*>(&f), 4);
  };
  for (double v : refiner.conv1_w) put(v);
  for (double v : refiner.conv1_b) put(v);
  for (double v : refiner.conv2_w) put(v);
  put(refiner.conv2_b);
  if (!out) throw std::runtime_error(path + ": write failed");
}

void write_point_list(const std::string& path,
                      const std::vector<Eigen::Vector3d>& points) {
  std::ofstream out = open_output(path, false);
  char buf[128];
  for (const Eigen::Vector3d& p : points) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string format_metric(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  std::string s(buf);
  if (s.find_first_of(".einf") == std::string::npos) s += ".0";
  return s;
}

}  // namespace flowdepth
