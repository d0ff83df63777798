#include "otval/fed/message.hpp"

#include <cstring>
#include <istream>
#include <json.hpp>
#include <ostream>

#include "otval/error.hpp"

namespace otval::fed {
namespace {

using nlohmann::json;

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void text(std::string_view s) { bytes(s.data(), s.size()); }
  void integer(std::int64_t v) { bytes(&v, sizeof(v)); }
  void real(double v) { bytes(&v, sizeof(v)); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

void hash_measure(Fnv1a& h, const DiscreteMeasure& m) {
  h.integer(m.size());
  h.integer(m.dim());
  for (Index i = 0; i < m.size(); ++i)
    for (Index k = 0; k < m.dim(); ++k) h.real(m.support(i, k));
  for (Index i = 0; i < m.weights.size(); ++i) h.real(m.weights[i]);
}

json measure_json(const DiscreteMeasure& m) {
  json rows = json::array();
  for (Index i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.dim(); ++k) row.push_back(m.support(i, k));
    rows.push_back(std::move(row));
  }
  json w = json::array();
  for (Index i = 0; i < m.weights.size(); ++i) w.push_back(m.weights[i]);
  return json{{"support", std::move(rows)}, {"weights", std::move(w)}};
}

DiscreteMeasure measure_from_json(const json& j) {
  const auto& rows = j.at("support");
  const auto& w = j.at("weights");
  const auto n = static_cast<Index>(rows.size());
  const Index d = n > 0 ? static_cast<Index>(rows.at(0).size()) : 0;
  DiscreteMeasure m;
  m.support.resize(n, d);
  m.weights.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != d) throw InputError("ragged measure in transcript");
    for (Index k = 0; k < d; ++k) m.support(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    m.weights[i] = w.at(static_cast<std::size_t>(i)).get<double>();
  }
  return m;
}

}  // namespace

std::string_view Message::kind() const {
  return std::visit(Overloaded{[](const ClientDistance&) { return std::string_view("ClientDistance"); },
                               [](const GammaShare&) { return std::string_view("GammaShare"); },
                               [](const EtaQShare&) { return std::string_view("EtaQShare"); },
                               [](const RoundControl&) { return std::string_view("RoundControl"); }},
                    payload);
}

int Message::client() const {
  return std::visit(Overloaded{[](const ClientDistance& m) { return m.client; },
                               [](const GammaShare& m) { return m.client; },
                               [](const EtaQShare& m) { return m.client; },
                               [](const RoundControl&) { return -1; }},
                    payload);
}

const DiscreteMeasure* Message::measure() const {
  if (const auto* g = std::get_if<GammaShare>(&payload)) return &g->gamma;
  if (const auto* e = std::get_if<EtaQShare>(&payload)) return &e->eta_q;
  return nullptr;
}

std::uint64_t digest(const Message& message) {
  Fnv1a h;
  h.text(message.kind());
  h.integer(message.client());
  std::visit(Overloaded{[&](const ClientDistance& m) { h.real(m.distance); },
                        [&](const GammaShare& m) { hash_measure(h, m.gamma); },
                        [&](const EtaQShare& m) { hash_measure(h, m.eta_q); },
                        [&](const RoundControl& m) {
                          h.integer(m.round);
                          h.text(m.phase);
                        }},
             message.payload);
  return h.value();
}

void write_jsonl(const std::vector<Message>& transcript, std::ostream& out) {
  for (const Message& msg : transcript) {
    json payload = std::visit(
        Overloaded{[](const ClientDistance& m) { return json{{"distance", m.distance}}; },
                   [](const GammaShare& m) { return measure_json(m.gamma); },
                   [](const EtaQShare& m) { return measure_json(m.eta_q); },
                   [](const RoundControl& m) { return json{{"round", m.round}, {"phase", m.phase}}; }},
        msg.payload);
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(digest(msg)));
    const json line{{"round", msg.round},   {"phase", msg.phase}, {"kind", msg.kind()},
                    {"client", msg.client()}, {"digest", hex},      {"payload", std::move(payload)}};
    out << line.dump() << '\n';
  }
}

std::vector<Message> read_jsonl(std::istream& in) {
  std::vector<Message> transcript;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(std::string("transcript line is not JSON: ") + e.what());
    }
    Message msg;
    msg.round = j.at("round").get<int>();
    msg.phase = j.at("phase").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    const int client = j.at("client").get<int>();
    const json& p = j.at("payload");
    if (kind == "ClientDistance") {
      msg.payload = ClientDistance{client, p.at("distance").get<double>()};
    } else if (kind == "GammaShare") {
      msg.payload = GammaShare{client, measure_from_json(p)};
    } else if (kind == "EtaQShare") {
      msg.payload = EtaQShare{client, measure_from_json(p)};
    } else if (kind == "RoundControl") {
      msg.payload = RoundControl{p.at("round").get<int>(), p.at("phase").get<std::string>()};
    } else {
      throw InputError("unknown message kind '" + kind + "' in transcript");
    }
    transcript.push_back(std::move(msg));
  }
  return transcript;
}

}  // namespace otval::fed
