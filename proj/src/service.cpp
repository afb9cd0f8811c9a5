#include "maha/service.hpp"

#include <mutex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "maha/errors.hpp"

namespace maha {

using nlohmann::json;

struct Service::Impl {
    httplib::Server server;
    std::thread worker;
    mutable std::mutex mutex;
    std::shared_ptr<const EngineSnapshot> snapshot;

    std::shared_ptr<const EngineSnapshot> get() const {
        std::lock_guard<std::mutex> lock(mutex);
        return snapshot;
    }
    void set(std::shared_ptr<const EngineSnapshot> next) {
        std::lock_guard<std::mutex> lock(mutex);
        snapshot = std::move(next);
    }
};

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
    json j;
    j["error"] = message;
    reply_json(res, status, j);
}

FusionParams params_from_request(const EngineSnapshot& snap, const json& body) {
    FusionParams params = snap.config.fusion;
    if (body.contains("params")) {
        const auto& p = body.at("params");
        params.alpha = p.value("alpha", params.alpha);
        params.beta = p.value("beta", params.beta);
        params.lambda = p.value("lambda", params.lambda);
        params.seed_k = p.value("seed_k", params.seed_k);
        params.depth = p.value("depth", params.depth);
        params.final_k = p.value("k", p.value("final_k", params.final_k));
        if (p.contains("allowed_edges")) {
            std::set<EdgeType> edges;
            for (const auto& name : p.at("allowed_edges")) {
                edges.insert(edge_type_from_string(name.get<std::string>()));
            }
            params.allowed_edges = std::move(edges);
        }
    }
    return params;
}

} // namespace

Service::Service(std::shared_ptr<const EngineSnapshot> snapshot)
    : impl_(std::make_unique<Impl>()) {
    impl_->set(std::move(snapshot));

    impl_->server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        auto snap = impl_->get();
        json j;
        j["snapshot_id"] = snap->snapshot_id;
        j["counts"]["documents"] = snap->corpus.documents.size();
        j["counts"]["chunks"] = snap->corpus.chunks.size();
        j["counts"]["nodes"] = snap->graph.nodes().size();
        j["counts"]["edges"] = snap->graph.edges().size();
        reply_json(res, 200, j);
    });

    impl_->server.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
        auto snap = impl_->get();
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            reply_error(res, 400, "request body is not valid JSON");
            return;
        }
        if (!body.contains("question") || !body.at("question").is_string()) {
            reply_error(res, 400, "missing question");
            return;
        }
        const std::string question = body.at("question").get<std::string>();
        const std::string retriever = body.value("retriever", std::string("maha"));
        const bool with_answer = body.value("answer", false);
        try {
            auto params = params_from_request(*snap, body);
            auto output = run_query(*snap, retriever, question, params, with_answer);
            reply_json(res, 200, query_output_to_json(output, *snap));
        } catch (const provider_error& e) {
            reply_error(res, 503, e.what());
        } catch (const invalid_argument_error& e) {
            reply_error(res, 400, e.what());
        } catch (const json::exception& e) {
            reply_error(res, 400, e.what());
        }
    });

    impl_->server.Get(R"(/chunks/(.+))", [this](const httplib::Request& req,
                                                httplib::Response& res) {
        auto snap = impl_->get();
        const std::string id = req.matches[1];
        const Chunk* chunk = snap->corpus.find_chunk(id);
        if (!chunk) {
            reply_error(res, 404, "unknown chunk: " + id);
            return;
        }
        json j;
        j["snapshot_id"] = snap->snapshot_id;
        j["chunk_id"] = chunk->chunk_id;
        j["doc_id"] = chunk->doc_id;
        j["modality"] = to_string(chunk->modality);
        j["order_index"] = chunk->order_index;
        j["content"] = chunk->content;
        j["caption"] = chunk->caption;
        j["summary"] = chunk->summary;
        j["entities"] = chunk->entities;
        if (chunk->page) j["page"] = *chunk->page;
        reply_json(res, 200, j);
    });

    impl_->server.Get(R"(/graph/neighbors/(.+))", [this](const httplib::Request& req,
                                                         httplib::Response& res) {
        auto snap = impl_->get();
        const std::string id = req.matches[1];
        if (!snap->graph.has_node(id)) {
            reply_error(res, 404, "unknown chunk: " + id);
            return;
        }
        int depth = 1;
        if (req.has_param("depth")) {
            try {
                depth = std::stoi(req.get_param_value("depth"));
            } catch (...) {
                reply_error(res, 400, "bad depth");
                return;
            }
        }
        if (depth < 0) {
            reply_error(res, 400, "depth must be >= 0");
            return;
        }
        std::set<EdgeType> allowed = all_edge_types();
        if (req.has_param("types")) {
            allowed.clear();
            const std::string spec = req.get_param_value("types");
            std::size_t start = 0;
            try {
                while (start <= spec.size()) {
                    const std::size_t comma = spec.find(',', start);
                    const std::string name = spec.substr(
                        start, comma == std::string::npos ? std::string::npos : comma - start);
                    if (!name.empty()) allowed.insert(edge_type_from_string(name));
                    if (comma == std::string::npos) break;
                    start = comma + 1;
                }
            } catch (const format_error& e) {
                reply_error(res, 400, e.what());
                return;
            }
            if (allowed.empty()) {
                reply_error(res, 400, "types resolves to an empty set");
                return;
            }
        }
        auto closure = expand(snap->graph, {id}, allowed, depth);
        json j;
        j["snapshot_id"] = snap->snapshot_id;
        j["origin"] = id;
        json neighbors = json::array();
        for (const auto& [chunk_id, d] : closure) {
            json n;
            n["chunk_id"] = chunk_id;
            n["depth"] = d;
            neighbors.push_back(std::move(n));
        }
        j["neighbors"] = std::move(neighbors);
        reply_json(res, 200, j);
    });

    impl_->server.Post("/reload", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            reply_error(res, 400, "request body is not valid JSON");
            return;
        }
        if (!body.contains("snapshot_dir")) {
            reply_error(res, 400, "missing snapshot_dir");
            return;
        }
        try {
            auto next = std::make_shared<EngineSnapshot>(
                load_snapshot(body.at("snapshot_dir").get<std::string>()));
            impl_->set(std::move(next));
        } catch (const error& e) {
            reply_error(res, 400, e.what());
            return;
        }
        json j;
        j["snapshot_id"] = impl_->get()->snapshot_id;
        reply_json(res, 200, j);
    });
}

Service::~Service() { stop(); }

void Service::listen(const std::string& host, int port) {
    if (!impl_->server.listen(host, port)) {
        throw io_error("cannot listen on " + host + ":" + std::to_string(port));
    }
}

int Service::start_background(const std::string& host) {
    const int port = impl_->server.bind_to_any_port(host);
    if (port <= 0) throw io_error("cannot bind a port on " + host);
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void Service::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

void Service::swap_snapshot(std::shared_ptr<const EngineSnapshot> snapshot) {
    impl_->set(std::move(snapshot));
}

std::shared_ptr<const EngineSnapshot> Service::current_snapshot() const { return impl_->get(); }

} // namespace maha
