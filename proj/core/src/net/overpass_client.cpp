#include "ave/net/overpass_client.hpp"

#include <regex>

#include <httplib.h>

#include "ave/error.hpp"

namespace ave::net {

std::string fetch_overpass(const std::string& url, const std::string& query, int timeout_s) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, url_re)) throw Error(ErrorCode::Config, "not an http(s) URL: " + url);
  const std::string path = m[2].matched ? m[2].str() : "/";

  httplib::Client client(m[1].str());
  client.set_connection_timeout(timeout_s, 0);
  client.set_read_timeout(timeout_s, 0);
  client.set_follow_location(true);
  const auto res = client.Post(path, httplib::Params{{"data", query}});
  if (!res) {
    throw Error(ErrorCode::Network, "Overpass request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::Network, "Overpass returned HTTP " + std::to_string(res->status) + " from " + url);
  }
  return res->body;
}

}  // namespace ave::net
