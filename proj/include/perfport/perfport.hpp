#pragma once

#include "perfport/efficiency.hpp"
#include "perfport/errors.hpp"
#include "perfport/metrics.hpp"
#include "perfport/report.hpp"
#include "perfport/repository.hpp"
