#include <httplib.h>

#include <nlohmann/json.hpp>

#include "echogan/dataio/image_io.hpp"
#include "echogan/inference.hpp"

namespace echogan::inference {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, json{{"error", message}});
}

json describe(const LoadedModel& model) {
    return json{{"checkpoint", model.id()},
                {"condition_spec", std::string(1, model.spec().name())},
                {"labels", model.spec().labels()},
                {"input_size", model.input_size()}};
}

}  // namespace

InferenceServer::InferenceServer(const ModelRegistry& registry)
    : registry_(registry), server_(std::make_unique<httplib::Server>()) {
    // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which lets
    // a second server silently share a port that is already in use.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
    install_routes();
}

InferenceServer::~InferenceServer() { stop(); }

void InferenceServer::install_routes() {
    // The mask editor is served from a different origin.
    server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Headers", "Content-Type"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
    });

    server_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"status", "ok"}, {"models", registry_.models().size()}});
    });

    server_->Get("/models", [this](const httplib::Request&, httplib::Response& res) {
        json list = json::array();
        for (const auto& model : registry_.models()) list.push_back(describe(*model));
        send_json(res, 200, list);
    });

    server_->Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            send_error(res, 400, "request body is not valid JSON");
            return;
        }
        if (!body.is_object() || !body.contains("mask_png_b64") || !body["mask_png_b64"].is_string()) {
            send_error(res, 400, "missing string field 'mask_png_b64'");
            return;
        }

        GenerationRequest request;
        if (body.contains("checkpoint")) {
            if (!body["checkpoint"].is_string()) {
                send_error(res, 400, "'checkpoint' must be a string");
                return;
            }
            request.checkpoint_id = body["checkpoint"].get<std::string>();
        } else if (registry_.models().size() == 1) {
            request.checkpoint_id = registry_.models().front()->id();
        } else {
            send_error(res, 400, "missing field 'checkpoint'");
            return;
        }
        if (body.contains("output_size")) {
            if (!body["output_size"].is_number_integer()) {
                send_error(res, 400, "'output_size' must be an integer");
                return;
            }
            request.output_size = body["output_size"].get<int>();
            if (request.output_size < 1 || request.output_size > 4096) {
                send_error(res, 400, "'output_size' must lie in [1, 4096]");
                return;
            }
        }

        const LoadedModel* model = registry_.find(request.checkpoint_id);
        if (model == nullptr) {
            send_error(res, 404, "unknown checkpoint '" + request.checkpoint_id + "'");
            return;
        }

        try {
            const std::string png = dataio::base64_decode(body["mask_png_b64"].get<std::string>());
            request.mask = dataio::LabelMap::from_raster(dataio::decode_png(png), "request mask");
        } catch (const Error& e) {
            send_error(res, 400, std::string("invalid mask: ") + e.what());
            return;
        }

        try {
            const GenerationResponse response = generate_from_mask(request, model);
            const std::string png = encode_frame_png(response.image);
            ++served_;
            send_json(res, 200,
                      json{{"image_png_b64", dataio::base64_encode(png)},
                           {"latency_ms", response.latency_ms},
                           {"checkpoint", response.checkpoint_id},
                           {"condition_spec", std::string(1, response.condition_spec)}});
        } catch (const Error& e) {
            send_error(res, 500, e.what());
        }
    });
}

int InferenceServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound <= 0) throw IoError("cannot bind " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port)) {
        throw IoError("cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void InferenceServer::listen() {
    if (!server_->listen_after_bind()) throw IoError("server stopped with an error");
}

void InferenceServer::wait_until_ready() const { server_->wait_until_ready(); }

void InferenceServer::stop() {
    if (server_ && server_->is_running()) server_->stop();
}

}  // namespace echogan::inference
