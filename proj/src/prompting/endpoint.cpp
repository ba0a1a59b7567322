// SPDX-License-Identifier: Apache-2.0
// Eigen must come before httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include "usdrecon/error.hpp"
#include "usdrecon/prompting/prompting.hpp"
#include "usdrecon/usd/usda.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <json.hpp>

namespace usdrecon {

namespace {

using nlohmann::json;

constexpr const char* kRepairRequest =
    "Your previous reply was not valid JSON. Reply again with only the JSON object, "
    "no prose and no code fences.";

// Models often wrap JSON in markdown fences; unwrap before parsing.
std::string strip_fences(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return s;
  s = s.substr(first);
  if (s.rfind("```", 0) != 0) return s;
  const auto nl = s.find('\n');
  const auto close = s.rfind("```");
  if (nl == std::string::npos || close <= nl) return s;
  return s.substr(nl + 1, close - nl - 1);
}

std::string post_chat(httplib::Client& client, const EndpointConfig& endpoint,
                      const json& messages) {
  json body = {{"model", endpoint.model},
               {"messages", messages},
               {"response_format", {{"type", "json_object"}}},
               {"seed", endpoint.seed}};
  httplib::Headers headers;
  if (const auto key = endpoint.api_key()) headers.emplace("Authorization", "Bearer " + *key);

  const auto start = std::chrono::steady_clock::now();
  const httplib::Result res = client.Post(endpoint.path, headers, body.dump(), "application/json");
  if (!res) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const httplib::Error err = res.error();
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= 0.9 * endpoint.timeout_seconds)) {
      throw Error(ErrorCode::kTimeout, "chat endpoint timed out after " +
                                           std::to_string(endpoint.timeout_seconds) + " s");
    }
    throw Error(ErrorCode::kNetwork, "chat endpoint request failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::kNetwork, "chat endpoint returned HTTP " + std::to_string(res->status));
  }
  json reply;
  try {
    reply = json::parse(res->body);
    const json& content = reply.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw std::runtime_error("content is not a string");
    return content.get<std::string>();
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidResponse,
                "chat endpoint reply lacks choices[0].message.content");
  }
}

}  // namespace

WaypointPlan request_plan(const PromptBundle& bundle, const EndpointConfig& endpoint) {
  endpoint.validate();
  if (endpoint.mock) {
    SceneState scene;
    try {
      scene = scene_from_stage(parse_usda(bundle.scene_usda));
    } catch (const ParseError& e) {
      throw Error(ErrorCode::kInvalidScene, std::string("scene USDA does not parse: ") + e.what());
    }
    return mock_plan(scene, bundle.user_task, endpoint.mock_standoff, endpoint.clearance);
  }

  httplib::Client client(endpoint.base_url);
  const auto secs = static_cast<time_t>(endpoint.timeout_seconds);
  const auto usecs = static_cast<time_t>((endpoint.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  json messages = json::array({{{"role", "system"}, {"content", bundle.system_text}},
                               {{"role", "user"}, {"content", bundle.user_message()}}});
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string content = post_chat(client, endpoint, messages);
    try {
      return parse_waypoint_plan(strip_fences(content));
    } catch (const ParseError&) {
      messages.push_back({{"role", "assistant"}, {"content", content}});
      messages.push_back({{"role", "user"}, {"content", kRepairRequest}});
    }
  }
  throw Error(ErrorCode::kInvalidResponse, "chat endpoint returned invalid JSON twice");
}

std::vector<Waypoint> request_waypoints(const PromptBundle& bundle, const EndpointConfig& endpoint) {
  return request_plan(bundle, endpoint).waypoints;
}

}  // namespace usdrecon
