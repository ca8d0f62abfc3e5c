// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/service/server.hpp"

#include "nvo/error.hpp"
#include "nvo/image_io.hpp"
#include "nvo/parallel.hpp"
#include "nvo/service/session.hpp"

#include <algorithm>
#include <csignal>
#include <deque>
#include <optional>
#include <thread>
#include <utility>

#include <boost/asio/bind_executor.hpp>
#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/thread_pool.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

namespace nvo::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct Shared {
    std::shared_ptr<const Asset> asset;
    std::string asset_id;
    asio::thread_pool* renders = nullptr;
};

class WebSocketSession : public std::enable_shared_from_this<WebSocketSession> {
public:
    WebSocketSession(tcp::socket&& socket, const Shared& shared)
        : ws_(std::move(socket)), shared_(shared), core_(shared.asset, shared.asset_id) {}

    void accept(http::request<http::string_body> request) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(1 << 20);
        ws_.async_accept(request, beast::bind_front_handler(&WebSocketSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) {
            return;
        }
        enqueue({false, core_.hello(), {}});
        read();
    }

    void read() {
        ws_.async_read(buffer_, beast::bind_front_handler(&WebSocketSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            closed_ = true;
            return;
        }
        Step step;
        if (ws_.got_text()) {
            step = core_.on_message(beast::buffers_to_string(buffer_.data()));
        } else {
            step = core_.on_binary();
        }
        buffer_.consume(buffer_.size());
        apply(std::move(step));
        read();
    }

    void apply(Step step) {
        for (Outgoing& out : step.replies) {
            enqueue(std::move(out));
        }
        if (step.start) {
            // The job is a value snapshot; the worker never touches session state.
            asio::post(*shared_.renders, [self = shared_from_this(), job = std::move(*step.start)] {
                RenderOutcome outcome = execute(*self->shared_.asset, job);
                asio::dispatch(self->ws_.get_executor(), [self, outcome = std::move(outcome)] {
                    self->apply(self->core_.on_render_done(outcome));
                });
            });
        }
    }

    void enqueue(Outgoing out) {
        if (closed_) {
            return;
        }
        queue_.push_back(std::move(out));
        if (queue_.size() == 1) {
            write();
        }
    }

    void write() {
        Outgoing& front = queue_.front();
        ws_.binary(front.binary);
        auto done = beast::bind_front_handler(&WebSocketSession::on_write, shared_from_this());
        if (front.binary) {
            ws_.async_write(asio::buffer(front.bytes), std::move(done));
        } else {
            ws_.async_write(asio::buffer(front.text), std::move(done));
        }
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) {
            closed_ = true;
            queue_.clear();
            return;
        }
        queue_.pop_front();
        if (!queue_.empty()) {
            write();
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    Shared shared_;
    SessionCore core_;
    beast::flat_buffer buffer_;
    std::deque<Outgoing> queue_;
    bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, const Shared& shared) : stream_(std::move(socket)), shared_(shared) {}

    void run() {
        asio::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::read, shared_from_this()));
    }

private:
    void read() {
        request_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, request_,
                         beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            return;
        }
        const std::string_view target(request_.target().data(), request_.target().size());
        if (websocket::is_upgrade(request_)) {
            if (target == "/session") {
                stream_.expires_never();
                std::make_shared<WebSocketSession>(stream_.release_socket(), shared_)->accept(std::move(request_));
                return;
            }
            respond(http::status::not_found, "text/plain", "unknown endpoint\n");
            return;
        }
        if (target == "/healthz" && request_.method() == http::verb::get) {
            const nlohmann::json body{{"asset_id", shared_.asset_id}, {"voxel_count", shared_.asset->voxels.size()}};
            respond(http::status::ok, "application/json", body.dump());
        } else {
            respond(http::status::not_found, "text/plain", "unknown endpoint\n");
        }
    }

    void respond(http::status status, const char* content_type, std::string body) {
        auto response = std::make_shared<http::response<http::string_body>>(status, request_.version());
        response->set(http::field::content_type, content_type);
        response->keep_alive(request_.keep_alive());
        response->body() = std::move(body);
        response->prepare_payload();
        http::async_write(stream_, *response,
                          [self = shared_from_this(), response](beast::error_code ec, std::size_t) {
                              if (ec) {
                                  return;
                              }
                              if (response->keep_alive()) {
                                  self->read();
                              } else {
                                  beast::error_code ignored;
                                  self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                              }
                          });
    }

    beast::tcp_stream stream_;
    Shared shared_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
};

}  // namespace

struct Server::Impl {
    Impl(std::shared_ptr<const Asset> asset, std::string id, const ServerOptions& options)
        : renders(static_cast<std::size_t>(options.render_workers > 0 ? options.render_workers
                                                                      : std::max(1, hardware_threads()))),
          acceptor(io) {
        shared = {std::move(asset), std::move(id), &renders};
        const tcp::endpoint endpoint(asio::ip::make_address(options.address), options.port);
        try {
            acceptor.open(endpoint.protocol());
            acceptor.set_option(asio::socket_base::reuse_address(true));
            acceptor.bind(endpoint);
            acceptor.listen(asio::socket_base::max_listen_connections);
        } catch (const boost::system::system_error& e) {
            throw Error(ErrorCategory::kIo, std::string("cannot listen on ") + options.address + ":" +
                                                std::to_string(options.port) + ": " + e.what());
        }
        accept();
    }

    void accept() {
        acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (!acceptor.is_open()) {
                    return;
                }
            } else {
                std::make_shared<HttpSession>(std::move(socket), shared)->run();
            }
            accept();
        });
    }

    asio::io_context io;
    asio::thread_pool renders;
    tcp::acceptor acceptor;
    Shared shared;
    std::thread background;
};

Server::Server(std::shared_ptr<const Asset> asset, std::string asset_id, const ServerOptions& options)
    : impl_(std::make_unique<Impl>(std::move(asset), std::move(asset_id), options)) {}

std::unique_ptr<Server> Server::from_file(const std::filesystem::path& asset_path, const ServerOptions& options) {
    const std::vector<std::uint8_t> bytes = read_file(asset_path);
    auto asset = std::make_shared<const Asset>(load_asset(bytes));
    return std::make_unique<Server>(std::move(asset), nvo::asset_id(bytes), options);
}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

const std::string& Server::asset_id() const { return impl_->shared.asset_id; }

void Server::run(bool handle_signals) {
    std::optional<asio::signal_set> signals;
    if (handle_signals) {
        signals.emplace(impl_->io, SIGINT, SIGTERM);
        signals->async_wait([this](beast::error_code, int) { impl_->io.stop(); });
    }
    impl_->io.run();
}

void Server::start() {
    impl_->background = std::thread([this] { impl_->io.run(); });
}

void Server::stop() {
    if (!impl_) {
        return;
    }
    asio::post(impl_->io, [this] {
        beast::error_code ignored;
        impl_->acceptor.close(ignored);
        impl_->io.stop();
    });
    if (impl_->background.joinable()) {
        impl_->background.join();
    }
    impl_->io.stop();
    impl_->renders.join();
}

}  // namespace nvo::service
