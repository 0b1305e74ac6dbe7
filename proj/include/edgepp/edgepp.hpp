#pragma once

#include "edgepp/black_scholes.hpp"
#include "edgepp/bspp.hpp"
#include "edgepp/calibration.hpp"
#include "edgepp/diagnostics.hpp"
#include "edgepp/edgeworth_cf.hpp"
#include "edgepp/edgeworth_params.hpp"
#include "edgepp/edgeworth_quadrature.hpp"
#include "edgepp/error.hpp"
#include "edgepp/fourier_pricer.hpp"
#include "edgepp/heston_merton.hpp"
#include "edgepp/market_data.hpp"
#include "edgepp/mc_oracle.hpp"
#include "edgepp/model_registry.hpp"
#include "edgepp/rough_heston.hpp"
