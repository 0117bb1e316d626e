#pragma once

#include "nonlocal/error.hpp"
#include "nonlocal/model.hpp"
#include "nonlocal/characteristic.hpp"
#include "nonlocal/rootlocus.hpp"
#include "nonlocal/wellposedness.hpp"
#include "nonlocal/solver.hpp"
#include "nonlocal/io.hpp"
#include "nonlocal/scan.hpp"
