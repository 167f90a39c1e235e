#pragma once
// Static-chunk parallel loops. Work items write to disjoint slots, so results
// never depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bilab {

inline std::atomic<int>& thread_setting() {
    static std::atomic<int> n{0};
    return n;
}

// 0 means "hardware concurrency".
inline void set_threads(int n) { thread_setting() = n < 0 ? 0 : n; }

inline int worker_count() {
    int n = thread_setting();
    if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return n;
}

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// Streaming pairwise summation: blocks of 64 are summed left to right, block
// sums are merged along a fixed binary tree.
class PairwiseSum {
public:
    void add(double x) {
        block_ += x;
        if (++in_block_ == 64) flush();
    }
    double value() const {
        double tail = block_;
        double acc = 0.0;
        bool first = true;
        for (std::size_t i = 0; i < levels_.size(); ++i) {
            if (!used_[i]) continue;
            acc = first ? levels_[i] : levels_[i] + acc;
            first = false;
        }
        return first ? tail : acc + tail;
    }

private:
    void flush() {
        double carry = block_;
        block_ = 0.0;
        in_block_ = 0;
        for (std::size_t i = 0;; ++i) {
            if (i == levels_.size()) {
                levels_.push_back(carry);
                used_.push_back(true);
                return;
            }
            if (!used_[i]) {
                levels_[i] = carry;
                used_[i] = true;
                return;
            }
            carry = levels_[i] + carry;
            used_[i] = false;
        }
    }

    double block_ = 0.0;
    int in_block_ = 0;
    std::vector<double> levels_;
    std::vector<bool> used_;
};

template <class It>
double pairwise_sum(It first, It last) {
    PairwiseSum s;
    for (; first != last; ++first) s.add(*first);
    return s.value();
}

}  // namespace bilab
