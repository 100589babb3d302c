#include "dass/kitti.hpp"

#include <cstring>
#include <sstream>

#include "dass/errors.hpp"

namespace dass {

namespace {

float read_f32_le(const std::uint8_t* p) {
  std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                    static_cast<std::uint32_t>(p[1]) << 8 |
                    static_cast<std::uint32_t>(p[2]) << 16 |
                    static_cast<std::uint32_t>(p[3]) << 24;
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

void write_f32_le(float f, std::vector<std::uint8_t>* out) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  out->push_back(static_cast<std::uint8_t>(u & 0xff));
  out->push_back(static_cast<std::uint8_t>((u >> 8) & 0xff));
  out->push_back(static_cast<std::uint8_t>((u >> 16) & 0xff));
  out->push_back(static_cast<std::uint8_t>((u >> 24) & 0xff));
}

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 |
         static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

PointCloud parse_velodyne_bin(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 16 != 0)
    throw FormatError("velodyne: byte length " + std::to_string(bytes.size()) +
                      " not divisible by 16 (misaligned at offset " +
                      std::to_string(bytes.size() - bytes.size() % 16) + ")");
  const Eigen::Index n = static_cast<Eigen::Index>(bytes.size() / 16);
  Mat pts(n, 4);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 4; ++c)
      pts(i, c) = read_f32_le(bytes.data() + 16 * i + 4 * c);
  return PointCloud::from_points(std::move(pts));
}

std::vector<std::uint8_t> serialize_velodyne_bin(const PointCloud& cloud) {
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(cloud.valid_count) * 16);
  for (Eigen::Index i = 0; i < cloud.valid_count; ++i)
    for (int c = 0; c < 4; ++c)
      write_f32_le(static_cast<float>(cloud.points(i, c)), &out);
  return out;
}

LabelWords parse_semantickitti_labels(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 4 != 0)
    throw FormatError("label: byte length " + std::to_string(bytes.size()) +
                      " not divisible by 4");
  LabelWords out;
  const std::size_t n = bytes.size() / 4;
  out.semantic.reserve(n);
  out.instance.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t word = read_u32_le(bytes.data() + 4 * i);
    out.semantic.push_back(static_cast<std::uint16_t>(word & 0xffff));
    out.instance.push_back(static_cast<std::uint16_t>(word >> 16));
  }
  return out;
}

std::vector<std::uint8_t> serialize_semantickitti_labels(const LabelWords& words) {
  if (words.semantic.size() != words.instance.size())
    throw FormatError("label: semantic/instance length mismatch");
  std::vector<std::uint8_t> out;
  out.reserve(words.semantic.size() * 4);
  for (std::size_t i = 0; i < words.semantic.size(); ++i) {
    const std::uint32_t word =
        static_cast<std::uint32_t>(words.semantic[i]) |
        (static_cast<std::uint32_t>(words.instance[i]) << 16);
    out.push_back(static_cast<std::uint8_t>(word & 0xff));
    out.push_back(static_cast<std::uint8_t>((word >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((word >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((word >> 24) & 0xff));
  }
  return out;
}

RemapResult remap_labels(
    const std::vector<std::uint16_t>& raw,
    const std::vector<std::pair<std::uint16_t, std::int32_t>>& table) {
  RemapResult out;
  out.labels.reserve(raw.size());
  for (std::uint16_t id : raw) {
    std::int32_t mapped = kIgnoreLabel;
    bool found = false;
    for (const auto& [k, v] : table)
      if (k == id) {
        mapped = v;
        found = true;
        break;
      }
    if (!found) ++out.unknown_count;
    out.labels.push_back(mapped);
  }
  return out;
}

std::vector<KittiObject> parse_kitti_object_labels(const std::string& text) {
  std::vector<KittiObject> out;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::istringstream ls(line);
    KittiObject obj;
    double values[14];
    if (!(ls >> obj.type)) {
      throw FormatError("kitti label line " + std::to_string(line_no) +
                        ": missing type field");
    }
    for (int i = 0; i < 14; ++i) {
      if (!(ls >> values[i]))
        throw FormatError("kitti label line " + std::to_string(line_no) +
                          ": expected 14 numeric fields, got " + std::to_string(i));
    }
    if (ls >> obj.score) obj.has_score = true;

    if (obj.type == "DontCare") continue;
    if (obj.type == "Van") obj.type = "Car";

    obj.truncated = values[0];
    obj.occluded = static_cast<int>(values[1]);
    obj.alpha = values[2];
    for (int i = 0; i < 4; ++i) obj.bbox2d[static_cast<std::size_t>(i)] = values[3 + i];
    obj.box.h = values[7];
    obj.box.w = values[8];
    obj.box.l = values[9];
    obj.box.x = values[10];
    obj.box.y = values[11];
    obj.box.z = values[12];
    obj.box.r = values[13];
    out.push_back(obj);
  }
  return out;
}

std::string serialize_kitti_object_labels(const std::vector<KittiObject>& objects) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const auto& o : objects) {
    out << o.type << ' ' << o.truncated << ' ' << o.occluded << ' ' << o.alpha;
    for (double v : o.bbox2d) out << ' ' << v;
    out << ' ' << o.box.h << ' ' << o.box.w << ' ' << o.box.l << ' ' << o.box.x
        << ' ' << o.box.y << ' ' << o.box.z << ' ' << o.box.r;
    if (o.has_score) out << ' ' << o.score;
    out << '\n';
  }
  return out.str();
}

KittiCalib parse_kitti_calib(const std::string& text) {
  KittiCalib calib;
  bool have_tr = false, have_r0 = false;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    std::istringstream vals(line.substr(colon + 1));
    if (key == "Tr_velo_to_cam") {
      Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c)
          if (!(vals >> m(r, c)))
            throw FormatError("calib line " + std::to_string(line_no) +
                              ": Tr_velo_to_cam needs 12 values");
      calib.tr_velo_to_cam = m;
      have_tr = true;
    } else if (key == "R0_rect") {
      Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          if (!(vals >> m(r, c)))
            throw FormatError("calib line " + std::to_string(line_no) +
                              ": R0_rect needs 9 values");
      calib.r0_rect = m;
      have_r0 = true;
    }
  }
  if (!have_tr || !have_r0)
    throw FormatError("calib: missing Tr_velo_to_cam or R0_rect entry");
  return calib;
}

std::vector<KittiObject> cam_boxes_to_lidar(const std::vector<KittiObject>& boxes,
                                            const KittiCalib& calib) {
  const Eigen::Matrix4d velo_from_cam = calib.cam_from_velo().inverse();
  std::vector<KittiObject> out = boxes;
  for (auto& o : out) {
    const Eigen::Vector4d loc(o.box.x, o.box.y, o.box.z, 1.0);
    const Eigen::Vector4d v = velo_from_cam * loc;
    o.box.x = v.x();
    o.box.y = v.y();
    o.box.z = v.z();
    o.box.r = wrap_angle(-o.box.r - kPi / 2);
  }
  return out;
}

std::vector<KittiObject> lidar_boxes_to_cam(const std::vector<KittiObject>& boxes,
                                            const KittiCalib& calib) {
  const Eigen::Matrix4d cam_from_velo = calib.cam_from_velo();
  std::vector<KittiObject> out = boxes;
  for (auto& o : out) {
    const Eigen::Vector4d loc(o.box.x, o.box.y, o.box.z, 1.0);
    const Eigen::Vector4d v = cam_from_velo * loc;
    o.box.x = v.x();
    o.box.y = v.y();
    o.box.z = v.z();
    o.box.r = wrap_angle(-(o.box.r + kPi / 2));
  }
  return out;
}

void velodyne_to_internal(PointCloud& cloud) {
  for (Eigen::Index i = 0; i < cloud.valid_count; ++i) {
    const double vx = cloud.points(i, 0), vy = cloud.points(i, 1),
                 vz = cloud.points(i, 2);
    cloud.points(i, 0) = -vy;  // right
    cloud.points(i, 1) = vz;   // up
    cloud.points(i, 2) = vx;   // forward
  }
}

void internal_to_velodyne(PointCloud& cloud) {
  for (Eigen::Index i = 0; i < cloud.valid_count; ++i) {
    const double ix = cloud.points(i, 0), iy = cloud.points(i, 1),
                 iz = cloud.points(i, 2);
    cloud.points(i, 0) = iz;
    cloud.points(i, 1) = -ix;
    cloud.points(i, 2) = iy;
  }
}

}  // namespace dass
