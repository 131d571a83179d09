#include "perturbopt/nn/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "perturbopt/errors.hpp"

namespace perturbopt::nn {

void to_json(nlohmann::json& j, const ModelSpec& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : m.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      layers.push_back({{"type", "dense"},
                        {"in", d->in},
                        {"out", d->out},
                        {"activation", to_string(d->activation)},
                        {"bias", d->bias}});
    } else if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
      layers.push_back({{"type", "conv2d"},
                        {"in_ch", c->in_ch},
                        {"out_ch", c->out_ch},
                        {"kernel", {c->kernel_h, c->kernel_w}},
                        {"activation", to_string(c->activation)},
                        {"bias", c->bias}});
    } else {
      layers.push_back({{"type", "flatten"}});
    }
  }
  j = nlohmann::json{{"layers", std::move(layers)}, {"loss_head", to_string(m.loss_head)}};
  if (!m.input_shape.empty()) j["input_shape"] = m.input_shape;
}

void from_json(const nlohmann::json& j, ModelSpec& m) {
  try {
    m = ModelSpec{};
    if (j.contains("input_shape")) m.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
    for (const auto& l : j.at("layers")) {
      const auto type = l.at("type").get<std::string>();
      const auto act = activation_from_string(l.value("activation", std::string("identity")));
      const bool bias = l.value("bias", true);
      if (type == "dense") {
        m.layers.emplace_back(DenseLayer{l.at("in").get<std::size_t>(), l.at("out").get<std::size_t>(), act, bias});
      } else if (type == "conv2d") {
        std::size_t kh = 0, kw = 0;
        const auto& k = l.at("kernel");
        if (k.is_array()) {
          kh = k.at(0).get<std::size_t>();
          kw = k.at(1).get<std::size_t>();
        } else {
          kh = kw = k.get<std::size_t>();
        }
        m.layers.emplace_back(
            Conv2dLayer{l.at("in_ch").get<std::size_t>(), l.at("out_ch").get<std::size_t>(), kh, kw, act, bias});
      } else if (type == "flatten") {
        m.layers.emplace_back(FlattenLayer{});
      } else {
        throw ValidationError("unknown layer type '" + type + "'");
      }
    }
    m.loss_head = loss_head_from_string(j.at("loss_head").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid model spec: ") + e.what());
  }
  m.validate();
}

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  os.write(bytes, 8);
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string magic_str(const Magic& m) { return std::string(m.data(), m.size()); }

}  // namespace

void write_container(const std::filesystem::path& path, const Magic& magic, std::span<const double> values) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot open '" + path.string() + "' for writing");
  os.write(magic.data(), magic.size());
  put_u64(os, values.size());
  for (double v : values) put_u64(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw ValidationError("write to '" + path.string() + "' failed");
}

std::vector<double> read_container(const std::filesystem::path& path, const Magic& magic) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw ValidationError("'" + path.string() + "' is too short for a container header");
  if (std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
    throw ValidationError("'" + path.string() + "': expected magic " + magic_str(magic) + ", found " +
                          std::string(reinterpret_cast<const char*>(bytes.data()), 8));
  }
  const std::uint64_t count = get_u64(bytes.data() + 8);
  if (bytes.size() != 16 + count * 8) {
    throw ValidationError("'" + path.string() + "': header declares " + std::to_string(count) +
                          " values but payload has " + std::to_string((bytes.size() - 16) / 8));
  }
  std::vector<double> out(count);
  for (std::uint64_t i = 0; i < count; ++i) out[i] = std::bit_cast<double>(get_u64(bytes.data() + 16 + 8 * i));
  return out;
}

void save_params(const std::filesystem::path& path, const ParamVector& w) {
  write_container(path, kParamMagic, w.span());
}

ParamVector load_params(const std::filesystem::path& path, const FilterLayout& layout) {
  auto values = read_container(path, kParamMagic);
  if (values.size() != layout.total_dim) {
    throw ValidationError("'" + path.string() + "' holds " + std::to_string(values.size()) +
                          " parameters, model expects " + std::to_string(layout.total_dim));
  }
  return ParamVector(std::move(values), layout);
}

}  // namespace perturbopt::nn
