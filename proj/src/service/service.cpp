#include "doorway/service/service.hpp"

#include <chrono>
#include <deque>
#include <map>
#include <mutex>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace doorway {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

// A client this far behind is dropped rather than buffered without bound.
constexpr std::size_t kMaxQueuedPerClient = 4096;

}  // namespace

class Session;

struct WebSocketServer::Impl {
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread thread;
  std::map<std::uint64_t, std::shared_ptr<Session>> sessions;  // io thread only
  std::uint64_t nextId = 1;
  std::atomic<std::size_t> clients{0};
  std::mutex inboxMutex;
  std::vector<Inbound> inbox;
  bool started = false;

  void push(Inbound in) {
    std::lock_guard lock(inboxMutex);
    inbox.push_back(std::move(in));
  }
  void accept();
  void remove(std::uint64_t id);
};

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, WebSocketServer::Impl& server, std::uint64_t id)
      : ws_(std::move(socket)), server_(server), id_(id) {}

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_.sessions[self->id_] = self;
      self->server_.clients = self->server_.sessions.size();
      self->server_.push({Inbound::Kind::Connected, self->id_, {}});
      self->read();
    });
  }

  void send(std::shared_ptr<const std::string> text) {
    if (closed_) return;
    if (queue_.size() >= kMaxQueuedPerClient) {
      close();
      return;
    }
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    queue_.clear();
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).socket().close(ignored);
    server_.remove(id_);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      self->server_.push({Inbound::Kind::Message, self->id_, beast::buffers_to_string(self->buffer_.data())});
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      if (self->queue_.empty()) return;
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  WebSocketServer::Impl& server_;
  std::uint64_t id_;
  bool closed_ = false;
};

void WebSocketServer::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<Session>(std::move(socket), *this, nextId++)->run();
    accept();
  });
}

void WebSocketServer::Impl::remove(std::uint64_t id) {
  sessions.erase(id);
  clients = sessions.size();
}

WebSocketServer::WebSocketServer(const std::string& address, unsigned short port) : impl_(std::make_unique<Impl>()) {
  const tcp::endpoint endpoint(net::ip::make_address(address), port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen(net::socket_base::max_listen_connections);
}

WebSocketServer::~WebSocketServer() { stop(); }

void WebSocketServer::start() {
  if (impl_->started) return;
  impl_->started = true;
  impl_->accept();
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void WebSocketServer::stop() {
  if (!impl_ || !impl_->started) return;
  net::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
    auto sessions = impl->sessions;
    for (auto& [id, s] : sessions) s->close();
  });
  // Closing the acceptor and sockets lets run() return on its own; stop()
  // covers handlers that would otherwise linger on timeouts.
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->sessions.clear();
  impl_->started = false;
}

unsigned short WebSocketServer::port() const { return impl_->acceptor.local_endpoint().port(); }

std::size_t WebSocketServer::clientCount() const { return impl_->clients; }

std::vector<Inbound> WebSocketServer::drainInbox() {
  std::lock_guard lock(impl_->inboxMutex);
  return std::exchange(impl_->inbox, {});
}

void WebSocketServer::send(std::uint64_t client, std::shared_ptr<const std::string> text) {
  net::post(impl_->ioc, [impl = impl_.get(), client, text = std::move(text)] {
    if (auto it = impl->sessions.find(client); it != impl->sessions.end()) it->second->send(text);
  });
}

void WebSocketServer::broadcast(std::shared_ptr<const std::string> text) {
  net::post(impl_->ioc, [impl = impl_.get(), text = std::move(text)] {
    auto sessions = impl->sessions;
    for (auto& [id, s] : sessions) s->send(text);
  });
}

RuntimeService::RuntimeService(std::unique_ptr<Runtime> runtime, ServiceOptions options, EventLog* eventLog)
    : runtime_(std::move(runtime)),
      options_(std::move(options)),
      processor_(*runtime_),
      server_(options_.address, options_.port) {
  processor_.setLogSink(eventLog);
}

RuntimeService::~RuntimeService() {
  stop();
  join();
  server_.stop();
}

void RuntimeService::start() {
  loop_ = std::thread([this] { run(); });
}

void RuntimeService::join() {
  if (loop_.joinable()) loop_.join();
}

void RuntimeService::broadcast(const std::vector<nlohmann::json>& messages) {
  for (const auto& m : messages) server_.broadcast(std::make_shared<const std::string>(m.dump()));
}

void RuntimeService::processInbox() {
  for (auto& in : server_.drainInbox()) {
    if (in.kind == Inbound::Kind::Connected) {
      server_.send(in.client, std::make_shared<const std::string>(
                                  makeMessage(MessageType::TreeSnapshot, processor_.treeSnapshot()).dump()));
      server_.send(in.client, std::make_shared<const std::string>(
                                  makeMessage(MessageType::WorldSnapshot, processor_.worldSnapshot()).dump()));
      continue;
    }
    server_.send(in.client, std::make_shared<const std::string>(processor_.handle(in.text).dump()));
  }
}

void RuntimeService::run() {
  using clock = std::chrono::steady_clock;
  server_.start();
  const double dt = runtime_->world().dt();
  const std::int64_t ticksPerBroadcast =
      std::max<std::int64_t>(1, std::llround(1.0 / (dt * std::max(options_.broadcastHz, 1e-3))));
  const auto idlePeriod = std::chrono::duration<double>(1.0 / std::max(options_.broadcastHz, 1e-3));

  auto paceOrigin = clock::now();
  std::int64_t paceTick = runtime_->world().tick();
  auto lastIdleBroadcast = clock::now();

  while (!stop_) {
    processInbox();
    if (runtime_->status() == RunStatus::Running) {
      runtime_->tick();
      const bool periodic = runtime_->world().tick() % ticksPerBroadcast == 0;
      broadcast(processor_.collectOutgoing(periodic));
      if (options_.realtimeFactor > 0.0) {
        const double simElapsed = static_cast<double>(runtime_->world().tick() - paceTick) * dt;
        std::this_thread::sleep_until(paceOrigin +
                                      std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(
                                          simElapsed / options_.realtimeFactor)));
      }
    } else {
      // Finished or aborted: keep serving commands until stopped.
      const auto now = clock::now();
      const bool periodic = now - lastIdleBroadcast >= idlePeriod;
      if (periodic) lastIdleBroadcast = now;
      broadcast(processor_.collectOutgoing(periodic));
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      paceOrigin = clock::now();
      paceTick = runtime_->world().tick();
    }
  }
  processInbox();
  broadcast(processor_.collectOutgoing(true));
}

}  // namespace doorway
