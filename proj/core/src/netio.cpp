// SPDX-License-Identifier: MIT
#include "singlab/netio.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "singlab/errors.hpp"

namespace singlab {

using nlohmann::json;

namespace {

json activation_to_json(const Activation& a) {
  json j;
  j["kind"] = a.name();
  j["c1"] = a.c1;
  j["c2"] = a.c2;
  return j;
}

Activation activation_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "relu") return Activation::relu();
  if (kind == "leaky-relu") return Activation::leaky_relu(j.at("c2").get<double>());
  if (kind == "affine-piecewise") {
    return Activation::affine_piecewise(j.at("c1").get<double>(),
                                        j.at("c2").get<double>());
  }
  if (kind == "sigmoid") return Activation::sigmoid();
  if (kind == "softplus") return Activation::softplus();
  if (kind == "swish") return Activation::swish();
  throw ConfigError("network file: unknown activation kind '" + kind + "'");
}

}  // namespace

std::string network_to_json(const Network& net) {
  net.check();
  long long params = 0;
  for (const auto& l : net.layers) {
    params += static_cast<long long>(l.in) * l.out + l.out;
  }
  if (params > 250000) {
    std::cerr << "singlab: warning: serializing a network with " << params
              << " dense entries; the file will be large\n";
  }
  json j;
  j["format"] = "singlab-network";
  j["version"] = 1;
  j["activation"] = activation_to_json(net.act);
  if (net.clip) {
    j["clip"] = *net.clip;
  } else {
    j["clip"] = nullptr;
  }
  j["layers"] = json::array();
  for (const auto& l : net.layers) {
    for (double v : l.val) {
      if (!std::isfinite(v)) throw ConfigError("cannot serialize non-finite weight");
    }
    for (double v : l.bias) {
      if (!std::isfinite(v)) throw ConfigError("cannot serialize non-finite bias");
    }
    json jl;
    jl["in"] = l.in;
    jl["out"] = l.out;
    jl["weights"] = l.to_dense();
    jl["bias"] = l.bias;
    j["layers"].push_back(std::move(jl));
  }
  return j.dump();
}

Network network_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network file: JSON parse error: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "singlab-network") {
      throw ConfigError("network file: unexpected format tag");
    }
    if (j.at("version").get<int>() != 1) {
      throw ConfigError("network file: unsupported version");
    }
    Network net;
    net.act = activation_from_json(j.at("activation"));
    if (!j.at("clip").is_null()) net.clip = j.at("clip").get<double>();
    for (const auto& jl : j.at("layers")) {
      const int in = jl.at("in").get<int>();
      const int out = jl.at("out").get<int>();
      net.layers.push_back(Layer::dense(out, in,
                                        jl.at("weights").get<std::vector<double>>(),
                                        jl.at("bias").get<std::vector<double>>()));
    }
    net.check();
    return net;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network file: missing or mistyped field: ") +
                      e.what());
  }
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << network_to_json(net) << '\n';
  if (!f.good()) throw ConfigError("write failed for '" + path + "'");
}

Network load_network(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for reading");
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return network_from_json(text);
}

}  // namespace singlab
