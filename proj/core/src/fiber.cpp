#include "fibertb/fiber.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "fibertb/errors.hpp"

namespace fibertb {

std::string_view to_string(SpanId id) {
  switch (id) {
    case SpanId::A: return "A";
    case SpanId::B: return "B";
    case SpanId::C: return "C";
    case SpanId::D: return "D";
  }
  return "?";
}

std::string_view to_string(Site site) {
  switch (site) {
    case Site::Lincoln: return "MIT-LL";
    case Site::Mit: return "MIT";
    case Site::Harvard: return "Harvard";
  }
  return "?";
}

std::string_view to_string(ConfigurationKind kind) {
  switch (kind) {
    case ConfigurationKind::Differential: return "differential";
    case ConfigurationKind::RoundTrip: return "round-trip";
    case ConfigurationKind::ThreeNode: return "three-node";
  }
  return "?";
}

SpanId span_id_from_string(std::string_view text) {
  if (text == "A") return SpanId::A;
  if (text == "B") return SpanId::B;
  if (text == "C") return SpanId::C;
  if (text == "D") return SpanId::D;
  throw ConfigError(fmt::format("unknown span id '{}'", text));
}

ConfigurationKind configuration_kind_from_string(std::string_view text) {
  if (text == "differential") return ConfigurationKind::Differential;
  if (text == "round-trip") return ConfigurationKind::RoundTrip;
  if (text == "three-node") return ConfigurationKind::ThreeNode;
  throw ConfigError(fmt::format("unknown configuration '{}'", text));
}

SpanEndpoints endpoints(SpanId id) {
  switch (id) {
    case SpanId::A:
    case SpanId::B: return {Site::Lincoln, Site::Mit};
    case SpanId::C:
    case SpanId::D: return {Site::Mit, Site::Harvard};
  }
  return {Site::Lincoln, Site::Mit};
}

void validate(const FiberSpan& span) {
  if (!(span.length_km > 0.0)) {
    throw ConfigError(fmt::format("span {}: length must be positive", to_string(span.id)));
  }
  for (const auto& [band, loss] : span.loss_db) {
    if (!(loss >= 0.0)) {
      throw ConfigError(fmt::format("span {}: loss at {} must be non-negative", to_string(span.id), to_string(band)));
    }
  }
}

namespace {

Site leg_origin(const SpanLeg& leg) {
  const auto ends = endpoints(leg.span.id);
  return leg.direction == Direction::Forward ? ends.forward_from : ends.forward_to;
}

Site leg_destination(const SpanLeg& leg) {
  const auto ends = endpoints(leg.span.id);
  return leg.direction == Direction::Forward ? ends.forward_to : ends.forward_from;
}

bool same_endpoints(SpanId a, SpanId b) {
  const auto ea = endpoints(a);
  const auto eb = endpoints(b);
  return ea.forward_from == eb.forward_from && ea.forward_to == eb.forward_to;
}

[[noreturn]] void incompatible(std::span<const FiberSpan> spans, ConfigurationKind kind, std::string_view why) {
  std::string ids;
  for (const auto& s : spans) ids += to_string(s.id);
  throw IncompatibleSpans(fmt::format("{} configuration of spans [{}]: {}", to_string(kind), ids, why));
}

}  // namespace

double Arm::length_km() const {
  return std::accumulate(legs.begin(), legs.end(), 0.0,
                         [](double acc, const SpanLeg& leg) { return acc + leg.span.length_km; });
}

Site Arm::origin() const { return legs.empty() ? Site::Lincoln : leg_origin(legs.front()); }
Site Arm::destination() const { return legs.empty() ? Site::Lincoln : leg_destination(legs.back()); }

NetworkConfiguration compose_configuration(std::span<const FiberSpan> spans, ConfigurationKind kind) {
  for (const auto& s : spans) validate(s);
  NetworkConfiguration config{kind, {}};

  switch (kind) {
    case ConfigurationKind::Differential: {
      if (spans.size() != 2) incompatible(spans, kind, "needs exactly two spans");
      if (spans[0].id == spans[1].id) incompatible(spans, kind, "spans must be distinct");
      if (!same_endpoints(spans[0].id, spans[1].id)) incompatible(spans, kind, "spans are not copropagating");
      config.arms.push_back(Arm{{SpanLeg{spans[0], Direction::Forward}}});
      config.arms.push_back(Arm{{SpanLeg{spans[1], Direction::Forward}}});
      break;
    }
    case ConfigurationKind::RoundTrip: {
      if (spans.size() != 2) incompatible(spans, kind, "needs exactly two spans");
      if (spans[0].id == spans[1].id) incompatible(spans, kind, "spans must be distinct");
      if (!same_endpoints(spans[0].id, spans[1].id)) incompatible(spans, kind, "endpoints do not chain back to the origin");
      config.arms.push_back(Arm{{SpanLeg{spans[0], Direction::Forward}, SpanLeg{spans[1], Direction::Reverse}}});
      config.arms.push_back(Arm{});
      break;
    }
    case ConfigurationKind::ThreeNode: {
      if (spans.size() != 3) incompatible(spans, kind, "needs a Lincoln-MIT span and two MIT-Harvard spans");
      const auto first = endpoints(spans[0].id);
      if (first.forward_from != Site::Lincoln || first.forward_to != Site::Mit) {
        incompatible(spans, kind, "first span must join MIT-LL and MIT");
      }
      for (std::size_t i = 1; i < 3; ++i) {
        const auto e = endpoints(spans[i].id);
        if (e.forward_from != Site::Mit || e.forward_to != Site::Harvard) {
          incompatible(spans, kind, "receive-side spans must join MIT and Harvard");
        }
      }
      if (spans[1].id == spans[2].id) incompatible(spans, kind, "receive-side spans must be distinct");
      config.arms.push_back(Arm{{SpanLeg{spans[0], Direction::Forward}, SpanLeg{spans[1], Direction::Forward}}});
      config.arms.push_back(Arm{{SpanLeg{spans[2], Direction::Forward}}});
      break;
    }
  }
  return config;
}

double nominal_delay_for_length(double length_m, double group_index) {
  if (!(group_index > 1.0)) {
    throw InvalidArgument(fmt::format("group index must exceed 1, got {}", group_index));
  }
  return length_m * group_index / constants::kSpeedOfLight;
}

double nominal_delay(const FiberSpan& span, double group_index) {
  return nominal_delay_for_length(span.length_m(), group_index);
}

double transit_delay(const FiberSpan& span, double group_index) {
  return nominal_delay(span, group_index) + span.delay_trim_s;
}

double span_loss(const FiberSpan& span, Band band) {
  const auto it = span.loss_db.find(band);
  if (it == span.loss_db.end()) {
    throw MissingCalibration(fmt::format("span {} has no loss entry at {}", to_string(span.id), to_string(band)));
  }
  return it->second;
}

double arm_loss(const Arm& arm, Band band) {
  double total = 0.0;
  for (const auto& leg : arm.legs) total += span_loss(leg.span, band);
  return total;
}

double ChannelPath::differential_delay() const {
  if (arm_delays.size() < 2) return arm_delays.empty() ? 0.0 : arm_delays.front();
  return arm_delays[0] - arm_delays[1];
}

ChannelPath make_channel_path(NetworkConfiguration config, Band wavelength, double group_index) {
  ChannelPath path{std::move(config), wavelength, {}};
  for (const auto& arm : path.config.arms) {
    double delay = 0.0;
    for (const auto& leg : arm.legs) delay += transit_delay(leg.span, group_index);
    path.arm_delays.push_back(delay);
  }
  return path;
}

double total_loss(const ChannelPath& path, Band band) {
  if (path.config.arms.empty()) return 0.0;
  return arm_loss(path.config.measured_arm(), band);
}

}  // namespace fibertb
