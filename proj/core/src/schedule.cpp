#include "qmlshots/schedule.hpp"

#include <algorithm>
#include <stdexcept>

namespace qmlshots::sched {

ShotSchedule ShotSchedule::constant(Shots s) {
    ShotSchedule sch;
    sch.kind = Kind::Constant;
    sch.s = s;
    sch.validate();
    return sch;
}

ShotSchedule ShotSchedule::linear(Shots s_start, Shots slope, Shots floor) {
    ShotSchedule sch;
    sch.kind = Kind::Linear;
    sch.s_start = s_start;
    sch.slope = slope;
    sch.floor = floor;
    sch.validate();
    return sch;
}

ShotSchedule ShotSchedule::step(Shots s_start, Shots delta, Shots period, Shots floor) {
    ShotSchedule sch;
    sch.kind = Kind::Step;
    sch.s_start = s_start;
    sch.delta = delta;
    sch.period = period;
    sch.floor = floor;
    sch.validate();
    return sch;
}

void ShotSchedule::validate() const {
    switch (kind) {
        case Kind::Constant:
            if (s < 1) throw std::invalid_argument("constant schedule needs s >= 1");
            break;
        case Kind::Linear:
            if (s_start < 1) throw std::invalid_argument("s_start must be >= 1");
            if (slope < 0) throw std::invalid_argument("slope must be >= 0");
            if (floor < 1) throw std::invalid_argument("floor must be >= 1");
            break;
        case Kind::Step:
            if (s_start < 1) throw std::invalid_argument("s_start must be >= 1");
            if (delta < 0) throw std::invalid_argument("delta must be >= 0");
            if (period < 1) throw std::invalid_argument("period must be >= 1");
            if (floor < 1) throw std::invalid_argument("floor must be >= 1");
            break;
    }
}

std::string ShotSchedule::describe() const {
    switch (kind) {
        case Kind::Constant:
            return "constant_" + std::to_string(s);
        case Kind::Linear:
            return "linear_s" + std::to_string(s_start) + "_m" + std::to_string(slope);
        case Kind::Step:
            return "step_s" + std::to_string(s_start) + "_d" + std::to_string(delta) +
                   "_p" + std::to_string(period);
    }
    return "?";
}

Shots shots_at(const ShotSchedule& schedule, long long t) {
    if (t < 1) {
        throw std::invalid_argument("epoch index is 1-based");
    }
    switch (schedule.kind) {
        case ShotSchedule::Kind::Constant:
            return schedule.s;
        case ShotSchedule::Kind::Linear:
            return std::max(schedule.floor, schedule.s_start - schedule.slope * t);
        case ShotSchedule::Kind::Step:
            return std::max(schedule.floor,
                            schedule.s_start - schedule.delta * (t / schedule.period));
    }
    return 0;
}

Shots total_training_shots(const ShotSchedule& schedule, long long epochs,
                           long long dataset_size, long long evals_per_item) {
    if (epochs < 1 || dataset_size < 1 || evals_per_item < 1) {
        throw std::invalid_argument("epochs, dataset_size, evals_per_item must be >= 1");
    }
    Shots per_item = 0;
    for (long long t = 1; t <= epochs; ++t) {
        per_item += shots_at(schedule, t);
    }
    return per_item * dataset_size * evals_per_item;
}

void ShotLedger::record(long long epoch, Shots shots_each, long long evaluations,
                        ShotCategory category) {
    if (evaluations < 0) {
        throw std::invalid_argument("evaluations must be >= 0");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    LedgerEntry e;
    e.epoch = epoch;
    e.shots_each = shots_each;
    e.evaluations = evaluations;
    e.consumed = shots_each * evaluations;
    e.category = category;
    totals_[static_cast<int>(category)] += e.consumed;
    entries_.push_back(e);
}

Shots ShotLedger::cumulative() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return totals_[0] + totals_[1] + totals_[2];
}

Shots ShotLedger::cumulative(ShotCategory category) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return totals_[static_cast<int>(category)];
}

std::vector<LedgerEntry> ShotLedger::entries() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_;
}

}  // namespace qmlshots::sched
