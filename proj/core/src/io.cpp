// Copyright 2026 The instreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "instreg/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "instreg/error.hpp"

namespace instreg {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

PlyType ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::I8;
  if (name == "uchar" || name == "uint8") return PlyType::U8;
  if (name == "short" || name == "int16") return PlyType::I16;
  if (name == "ushort" || name == "uint16") return PlyType::U16;
  if (name == "int" || name == "int32") return PlyType::I32;
  if (name == "uint" || name == "uint32") return PlyType::U32;
  if (name == "float" || name == "float32") return PlyType::F32;
  if (name == "double" || name == "float64") return PlyType::F64;
  throw Error(ErrorCode::IoError, "unsupported PLY property type '" + name + "'");
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::I8:
    case PlyType::U8: return 1;
    case PlyType::I16:
    case PlyType::U16: return 2;
    case PlyType::I32:
    case PlyType::U32:
    case PlyType::F32: return 4;
    case PlyType::F64: return 8;
  }
  return 0;
}

template <typename T>
double load_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double decode(PlyType t, const char* p) {
  switch (t) {
    case PlyType::I8: return load_as<std::int8_t>(p);
    case PlyType::U8: return load_as<std::uint8_t>(p);
    case PlyType::I16: return load_as<std::int16_t>(p);
    case PlyType::U16: return load_as<std::uint16_t>(p);
    case PlyType::I32: return load_as<std::int32_t>(p);
    case PlyType::U32: return load_as<std::uint32_t>(p);
    case PlyType::F32: return load_as<float>(p);
    case PlyType::F64: return load_as<double>(p);
  }
  return 0.0;
}

struct Property {
  std::string name;
  PlyType type;
};

std::string blob_path_for(const std::string& manifest_path) {
  std::filesystem::path p(manifest_path);
  return (p.parent_path() / (p.stem().string() + ".bin")).string();
}

json transform_to_json(const RigidTransform& t) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.push_back(t.rotation(i, j));
  }
  return {{"rotation", r}, {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

RigidTransform transform_from_json(const json& j) {
  const auto& r = j.at("rotation");
  const auto& t = j.at("translation");
  if (!r.is_array() || r.size() != 9 || !t.is_array() || t.size() != 3) {
    throw Error(ErrorCode::IoError, "pose needs 9 rotation and 3 translation entries");
  }
  RigidTransform out;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) out.rotation(i, k) = r[3 * i + k].get<double>();
    out.translation(i) = t[i].get<double>();
  }
  return out;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw Error(ErrorCode::IoError, "not a PLY stream");
  bool binary = false;
  bool in_vertex = false;
  bool seen_vertex = false;
  std::size_t vertex_count = 0;
  std::vector<Property> props;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt != "ascii") {
        throw Error(ErrorCode::IoError, "unsupported PLY format '" + fmt + "'");
      }
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      in_vertex = name == "vertex";
      if (in_vertex) {
        if (seen_vertex) throw Error(ErrorCode::IoError, "duplicate vertex element");
        if (!props.empty()) throw Error(ErrorCode::IoError, "vertex element must come first");
        seen_vertex = true;
        vertex_count = count;
      } else if (!seen_vertex) {
        throw Error(ErrorCode::IoError, "vertex element must come first");
      }
    } else if (word == "property") {
      if (!in_vertex) continue;
      std::string type, name;
      ls >> type;
      if (type == "list") throw Error(ErrorCode::IoError, "list properties on vertices are not supported");
      ls >> name;
      props.push_back({name, ply_type(type)});
    } else if (word == "end_header") {
      break;
    }
  }
  if (!seen_vertex) throw Error(ErrorCode::IoError, "PLY has no vertex element");

  int ix = -1, iy = -1, iz = -1, il = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i].name == "x") ix = static_cast<int>(i);
    if (props[i].name == "y") iy = static_cast<int>(i);
    if (props[i].name == "z") iz = static_cast<int>(i);
    if (props[i].name == "instance") il = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw Error(ErrorCode::IoError, "PLY vertices need x, y and z");

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  if (il >= 0) cloud.labels.reserve(vertex_count);
  std::vector<double> values(props.size());
  std::size_t stride = 0;
  for (const auto& p : props) stride += ply_size(p.type);
  std::vector<char> raw(stride);
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (binary) {
      if (!in.read(raw.data(), static_cast<std::streamsize>(stride))) {
        throw Error(ErrorCode::IoError, "PLY body truncated");
      }
      std::size_t off = 0;
      for (std::size_t i = 0; i < props.size(); ++i) {
        values[i] = decode(props[i].type, raw.data() + off);
        off += ply_size(props[i].type);
      }
    } else {
      for (std::size_t i = 0; i < props.size(); ++i) {
        if (!(in >> values[i])) throw Error(ErrorCode::IoError, "PLY body truncated");
        // same value the binary encoding would carry
        if (props[i].type == PlyType::F32) values[i] = static_cast<float>(values[i]);
      }
    }
    cloud.points.emplace_back(values[ix], values[iy], values[iz]);
    if (il >= 0) cloud.labels.push_back(static_cast<int>(values[il]));
  }
  return cloud;
}

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_ply(in);
}

void write_ply(std::ostream& out, const PointCloud& cloud, bool binary) {
  const bool labeled = cloud.has_labels();
  if (labeled && cloud.labels.size() != cloud.points.size()) {
    throw Error(ErrorCode::LengthMismatch, "labels must cover all points");
  }
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (labeled) out << "property int instance\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())};
    if (binary) {
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      if (labeled) {
        const std::int32_t l = cloud.labels[i];
        out.write(reinterpret_cast<const char*>(&l), sizeof(l));
      }
    } else {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", xyz[0], xyz[1], xyz[2]);
      out << buf;
      if (labeled) out << ' ' << cloud.labels[i];
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing PLY");
}

void write_ply(const std::string& path, const PointCloud& cloud, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_ply(out, cloud, binary);
}

void save_weights(const std::string& manifest_path, const WeightSet& weights) {
  weights.validate();
  WeightSet copy = weights;
  json tensors = json::array();
  std::vector<float> blob;
  copy.for_each_tensor([&](const std::string& name, Eigen::MatrixXd& m) {
    tensors.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}});
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) blob.push_back(static_cast<float>(m(r, c)));
    }
  });
  const std::string blob_path = blob_path_for(manifest_path);
  const json manifest = {
      {"format", "instreg-weights"},
      {"version", 1},
      {"dims", {{"backbone", weights.backbone_dim}, {"model", weights.model_dim}, {"ffn_hidden", weights.ffn_hidden}}},
      {"heads", weights.heads},
      {"num_iterations", weights.num_iterations()},
      {"blob", std::filesystem::path(blob_path).filename().string()},
      {"tensors", tensors},
  };
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  std::ofstream out(blob_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + blob_path);
  out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size() * sizeof(float)));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + blob_path);
}

WeightSet load_weights(const std::string& manifest_path) {
  const json manifest = parse_json(read_text_file(manifest_path));
  WeightSet w;
  std::vector<json> entries;
  std::string blob_name;
  try {
    if (manifest.at("format").get<std::string>() != "instreg-weights") {
      throw Error(ErrorCode::IoError, "not an instreg weights manifest");
    }
    const auto& dims = manifest.at("dims");
    const int backbone = dims.at("backbone").get<int>();
    const int model = dims.at("model").get<int>();
    const int hidden = dims.at("ffn_hidden").get<int>();
    const int heads = manifest.at("heads").get<int>();
    const int iters = manifest.at("num_iterations").get<int>();
    if (backbone < 1 || model < 2 || hidden < 1 || heads < 1 || iters < 0) {
      throw Error(ErrorCode::IoError, "weights manifest has invalid dims");
    }
    w = WeightSet::passthrough(backbone, model, heads, iters);
    w.ffn_hidden = hidden;
    for (auto& it : w.iterations) {
      for (auto* b : {&it.geometric, &it.cross, &it.mask.geodesic_attention}) {
        b->ffn.w1.resize(model, hidden);
        b->ffn.b1.resize(hidden);
        b->ffn.w2.resize(hidden, model);
      }
    }
    for (const auto& t : manifest.at("tensors")) entries.push_back(t);
    blob_name = manifest.at("blob").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("weights manifest: ") + e.what());
  }

  const auto blob_path = (std::filesystem::path(manifest_path).parent_path() / blob_name).string();
  const std::string raw = read_text_file(blob_path);
  std::size_t cursor = 0;
  std::size_t index = 0;
  w.for_each_tensor([&](const std::string& name, Eigen::MatrixXd& m) {
    if (index >= entries.size()) throw Error(ErrorCode::IoError, "weights manifest is missing tensor " + name);
    const auto& e = entries[index++];
    if (e.at("name").get<std::string>() != name) {
      throw Error(ErrorCode::IoError, "expected tensor " + name + ", manifest has " + e.at("name").get<std::string>());
    }
    const auto rows = e.at("shape").at(0).get<Eigen::Index>();
    const auto cols = e.at("shape").at(1).get<Eigen::Index>();
    if (rows != m.rows() || cols != m.cols()) throw Error(ErrorCode::ShapeMismatch, "tensor " + name + " has wrong shape");
    const std::size_t bytes = static_cast<std::size_t>(rows * cols) * sizeof(float);
    if (cursor + bytes > raw.size()) throw Error(ErrorCode::IoError, "weights blob truncated at " + name);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        float v;
        std::memcpy(&v, raw.data() + cursor, sizeof(float));
        cursor += sizeof(float);
        m(r, c) = v;
      }
    }
  });
  if (index != entries.size()) throw Error(ErrorCode::IoError, "weights manifest lists unknown tensors");
  if (cursor != raw.size()) throw Error(ErrorCode::IoError, "weights blob has trailing bytes");
  w.validate();
  return w;
}

std::string poses_to_json(const std::vector<PoseRecord>& poses) {
  json arr = json::array();
  for (const auto& p : poses) {
    json j = transform_to_json(p.pose);
    j["inlier_count"] = p.inlier_count;
    j["inlier_ratio"] = p.inlier_ratio;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::vector<PoseRecord> poses_from_json(const std::string& text) {
  const json arr = parse_json(text);
  if (!arr.is_array()) throw Error(ErrorCode::IoError, "poses file must hold a JSON array");
  std::vector<PoseRecord> out;
  try {
    for (const auto& j : arr) {
      PoseRecord r;
      r.pose = transform_from_json(j);
      r.inlier_count = j.value("inlier_count", 0);
      r.inlier_ratio = j.value("inlier_ratio", 0.0);
      out.push_back(r);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("poses file: ") + e.what());
  }
  return out;
}

std::string ground_truth_to_json(const GroundTruthFile& file) {
  json poses = json::array();
  for (const auto& p : file.gt.poses) poses.push_back(transform_to_json(p));
  const json j = {{"model", file.model},       {"model_points", file.model_points},
                  {"seed", file.seed},         {"diameter", file.gt.diameter},
                  {"symmetric", file.gt.symmetric}, {"visibility", file.gt.visibility},
                  {"poses", poses}};
  return j.dump(2) + "\n";
}

GroundTruthFile ground_truth_from_json(const std::string& text) {
  const json j = parse_json(text);
  GroundTruthFile out;
  try {
    out.model = j.at("model").get<std::string>();
    out.model_points = j.at("model_points").get<std::size_t>();
    out.seed = j.at("seed").get<std::uint64_t>();
    out.gt.diameter = j.at("diameter").get<double>();
    out.gt.symmetric = j.at("symmetric").get<bool>();
    out.gt.visibility = j.at("visibility").get<std::vector<double>>();
    for (const auto& p : j.at("poses")) out.gt.poses.push_back(transform_from_json(p));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("ground truth file: ") + e.what());
  }
  return out;
}

}  // namespace instreg
