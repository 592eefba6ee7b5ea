#pragma once

#include <cmath>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "qselect/errors.hpp"
#include "qselect/oracle.hpp"

namespace qselect {

/// Remote black-box client. Protocol: POST {"text": ...} to the endpoint,
/// response {"label": int, "probs": [float...]}.
class HttpOracle : public Oracle {
public:
    /// Endpoint form: http://host:port[/path]. Timeout in ms, overridable via
    /// QSELECT_HTTP_TIMEOUT_MS (default 5000).
    explicit HttpOracle(const std::string& endpoint, long timeout_ms = default_timeout_ms())
        : timeout_ms_(timeout_ms) {
        std::string rest = endpoint;
        if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
        auto slash = rest.find('/');
        host_port_ = "http://" + (slash == std::string::npos ? rest : rest.substr(0, slash));
        path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    }

    static long default_timeout_ms() {
        if (const char* env = std::getenv("QSELECT_HTTP_TIMEOUT_MS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end && *end == '\0' && v > 0) return v;
        }
        return 5000;
    }

    Verdict classify(const std::string& text) const override {
        httplib::Client client(host_port_);
        client.set_connection_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
        client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

        nlohmann::json body;
        body["text"] = text;
        auto res = client.Post(path_, body.dump(), "application/json");
        if (!res) throw OracleUnavailableError("classifier endpoint unreachable: " + host_port_);
        if (res->status != 200)
            throw OracleUnavailableError("classifier returned HTTP " +
                                         std::to_string(res->status));

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedResponseError(std::string("response is not valid JSON: ") + e.what());
        }
        if (!j.contains("label") || !j.contains("probs") || !j["probs"].is_array())
            throw MalformedResponseError("response missing label/probs");

        Verdict v;
        try {
            v.label = j["label"].get<std::size_t>();
            v.probs = j["probs"].get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw MalformedResponseError(std::string("bad label/probs types: ") + e.what());
        }
        double sum = 0.0;
        for (double p : v.probs) sum += p;
        if (std::abs(sum - 1.0) > 1e-6)
            throw ProbabilityInvalidError("probs sum to " + std::to_string(sum));
        if (v.label >= v.probs.size())
            throw MalformedResponseError("label index outside probs");
        return v;
    }

private:
    std::string host_port_;
    std::string path_;
    long timeout_ms_;
};

}  // namespace qselect
