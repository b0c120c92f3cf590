#include "qcache/identity.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace qcache {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  // Fetching the algorithm is far costlier than hashing a short message.
  static const std::unique_ptr<EVP_MD, decltype(&EVP_MD_free)> md(EVP_MD_fetch(nullptr, "SHA256", nullptr),
                                                                  &EVP_MD_free);
  thread_local const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!md || !ctx || EVP_DigestInit_ex(ctx.get(), md.get(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = kHex[digest[i] >> 4];
    out[2 * i + 1] = kHex[digest[i] & 0xF];
  }
  return out;
}

LabeledGraph canonical_graph(const zx::ZxGraph& g) {
  LabeledGraph lg;
  for (const auto& [v, vert] : g.vertices()) {
    std::string label;
    if (vert.kind == zx::VertexKind::Boundary) {
      if (auto i = g.input_index(v)) {
        label = "IN:" + std::to_string(*i);
      } else {
        label = "OUT:" + std::to_string(*g.output_index(v));
      }
    } else {
      label = (vert.kind == zx::VertexKind::Z ? "Z:" : "X:") + vert.phase.to_string();
    }
    lg.nodes.emplace(v, std::move(label));
  }
  for (const auto& [u, v, t] : g.edges()) lg.edges.emplace_back(u, v, t == zx::EdgeType::Simple ? "S" : "H");
  return lg;
}

std::string dump(const LabeledGraph& lg) {
  std::ostringstream out;
  for (const auto& [id, label] : lg.nodes) out << "node " << id << ' ' << label << '\n';
  for (const auto& [u, v, label] : lg.edges) out << "edge " << u << ' ' << v << ' ' << label << '\n';
  return out.str();
}

std::string wl_hash(const LabeledGraph& lg, int iterations) {
  if (iterations < 1) throw std::invalid_argument("wl_hash needs at least one iteration");
  std::map<int, std::vector<std::pair<const std::string*, int>>> adjacency;
  for (const auto& [id, _] : lg.nodes) adjacency[id];
  for (const auto& [u, v, label] : lg.edges) {
    adjacency.at(u).emplace_back(&label, v);
    adjacency.at(v).emplace_back(&label, u);
  }

  std::map<int, std::string> labels = lg.nodes;
  std::vector<std::string> nbr;
  for (int round = 0; round < iterations; ++round) {
    std::map<int, std::string> next;
    for (const auto& [id, own] : labels) {
      nbr.clear();
      for (const auto& [edge_label, other] : adjacency.at(id)) nbr.push_back(*edge_label + ":" + labels.at(other));
      std::sort(nbr.begin(), nbr.end());
      std::string message = own + "(";
      for (const auto& n : nbr) message += n + ";";
      message += ")";
      next.emplace(id, sha256_hex(message));
    }
    labels = std::move(next);
  }

  std::vector<std::string> final_labels;
  final_labels.reserve(labels.size());
  for (auto& [_, l] : labels) final_labels.push_back(std::move(l));
  std::sort(final_labels.begin(), final_labels.end());
  std::string joined;
  for (std::size_t i = 0; i < final_labels.size(); ++i) {
    if (i) joined += '\n';
    joined += final_labels[i];
  }
  return sha256_hex(joined).substr(0, 16);
}

CacheKey circuit_key(const Circuit& c, PayloadKind kind, int wl_iterations, PipelineTimings* timings) {
  auto t0 = Clock::now();
  zx::ZxGraph g = zx::circuit_to_zx(c);
  auto t1 = Clock::now();
  g = zx::full_reduce(std::move(g));
  auto t2 = Clock::now();
  const LabeledGraph lg = canonical_graph(g);
  auto t3 = Clock::now();
  CacheKey key;
  key.hash = wl_hash(lg, wl_iterations);
  key.n_qubits = c.n_qubits();
  key.interior_spiders = static_cast<int>(g.num_spiders());
  key.payload_kind = kind;
  if (timings) {
    timings->translate += std::chrono::duration<double>(t1 - t0).count();
    timings->reduce += std::chrono::duration<double>(t2 - t1).count();
    timings->serialize += std::chrono::duration<double>(t3 - t2).count();
    timings->hash += seconds_since(t3);
  }
  return key;
}

bool verify_key_match(const CacheKey& key, const Circuit& c, int wl_iterations) {
  const CacheKey fresh = circuit_key(c, key.payload_kind, wl_iterations);
  return fresh.n_qubits == key.n_qubits && fresh.interior_spiders == key.interior_spiders;
}

}  // namespace qcache
