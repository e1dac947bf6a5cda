#pragma once

#include "cyclegap/chain.hpp"
#include "cyclegap/error.hpp"
#include "cyclegap/experiments.hpp"
#include "cyclegap/interconnect.hpp"
#include "cyclegap/report.hpp"
#include "cyclegap/rng.hpp"
#include "cyclegap/serialization.hpp"
#include "cyclegap/spectral.hpp"
#include "cyclegap/theory.hpp"
#include "cyclegap/verify.hpp"
