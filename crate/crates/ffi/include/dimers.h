#ifndef DIMERS_H
#define DIMERS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum DimersStatus {
  Ok = 0,
  /**
   * Invalid argument or input outside the admissible domain.
   */
  InvalidInput = 1,
  /**
   * A validation check failed (non-univalent configuration, mismatched
   * cusp count, infeasible boundary data, ...).
   */
  ValidationFailed = 2,
  /**
   * An iterative solver did not converge.
   */
  NoConvergence = 3,
  /**
   * Null pointer passed where a handle or output slot was required.
   */
  NullPointer = 4,
} DimersStatus;

/**
 * Opaque frozen-boundary model handle.
 */
typedef struct DimersModel DimersModel;

/**
 * Opaque Aztec tiling handle.
 */
typedef struct DimersTiling DimersTiling;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Lobachevsky function 𝓛(θ).
 */
double dimers_lobachevsky(double theta);

/**
 * Lozenge surface tension σ_Lo(s, t).
 */
enum DimersStatus dimers_lozenge_sigma(double s, double t, double *out);

/**
 * ∇σ_Lo(s, t).
 */
enum DimersStatus dimers_lozenge_grad_sigma(double s, double t, double *out_x, double *out_y);

/**
 * Harmonic measure ω(ζ; arc from η₁ to η₂ counterclockwise).
 */
enum DimersStatus dimers_harmonic_measure(double zeta_re,
                                          double zeta_im,
                                          double eta1_re,
                                          double eta1_im,
                                          double eta2_re,
                                          double eta2_im,
                                          double *out);

/**
 * Asymptotic northbound-domino density of the normalized Aztec diamond.
 */
double dimers_aztec_density(double x, double y);

/**
 * Closed-form Aztec inverse map g⁻¹.
 */
enum DimersStatus dimers_aztec_f(double z_re, double z_im, double *out_re, double *out_im);

/**
 * Canonical epicycloid model of degree d. The returned handle must be
 * released with `dimers_model_free`.
 */
enum DimersStatus dimers_model_canonical(uint32_t d, struct DimersModel **out);

/**
 * Univalent polynomial model with d−2 prescribed cusp preimage angles.
 *
 * # Safety
 * `angles` must point to `n_angles` readable doubles.
 */
enum DimersStatus dimers_model_univalent(uint32_t d,
                                         const double *angles,
                                         size_t n_angles,
                                         struct DimersModel **out);

/**
 * # Safety
 * `model` must be a handle returned by one of the constructors, not yet
 * freed; passing anything else is undefined behavior.
 */
void dimers_model_free(struct DimersModel *model);

/**
 * Boundary parametrization R(e^{iθ}).
 *
 * # Safety
 * `model` must be a live handle from a constructor.
 */
enum DimersStatus dimers_model_boundary(const struct DimersModel *model,
                                        double theta,
                                        double *out_re,
                                        double *out_im);

/**
 * Teleomorphic homeomorphism g(z).
 *
 * # Safety
 * `model` must be a live handle from a constructor.
 */
enum DimersStatus dimers_model_g(const struct DimersModel *model,
                                 double z_re,
                                 double z_im,
                                 double *out_re,
                                 double *out_im);

/**
 * Proper Beltrami solution f = B ∘ g⁻¹ at a point of the liquid domain.
 *
 * # Safety
 * `model` must be a live handle from a constructor.
 */
enum DimersStatus dimers_model_f(const struct DimersModel *model,
                                 double z_re,
                                 double z_im,
                                 double *out_re,
                                 double *out_im);

/**
 * Invert g at a point of the liquid domain.
 *
 * # Safety
 * `model` must be a live handle from a constructor.
 */
enum DimersStatus dimers_model_invert_g(const struct DimersModel *model,
                                        double target_re,
                                        double target_im,
                                        double *out_re,
                                        double *out_im);

/**
 * Number of cusps of the frozen boundary.
 *
 * # Safety
 * `model` must be a live handle from a constructor.
 */
size_t dimers_model_cusp_count(const struct DimersModel *model);

/**
 * Cusp `index`: preimage angle and boundary point.
 *
 * # Safety
 * `model` must be a live handle from a constructor.
 */
enum DimersStatus dimers_model_cusp(const struct DimersModel *model,
                                    size_t index,
                                    double *out_angle,
                                    double *out_re,
                                    double *out_im);

/**
 * Run the Theorem-5.5 characterization checks; each flag is 0/1.
 *
 * # Safety
 * `model` must be a live handle from a constructor.
 */
enum DimersStatus dimers_model_check(const struct DimersModel *model,
                                     int32_t *out_univalent,
                                     int32_t *out_self_reflective,
                                     int32_t *out_pole_free,
                                     double *out_residual);

/**
 * Sample a uniform tiling of the order-n Aztec diamond.
 */
enum DimersStatus dimers_sample_tiling(uint32_t n, uint64_t seed, struct DimersTiling **out);

/**
 * # Safety
 * `tiling` must be a handle returned by `dimers_sample_tiling`, not yet
 * freed.
 */
void dimers_tiling_free(struct DimersTiling *tiling);

/**
 * # Safety
 * `tiling` must be a live handle.
 */
size_t dimers_tiling_len(const struct DimersTiling *tiling);

/**
 * Domino `index`: root cell and orientation ('N', 'S', 'E' or 'W').
 *
 * # Safety
 * `tiling` must be a live handle.
 */
enum DimersStatus dimers_tiling_domino(const struct DimersTiling *tiling,
                                       size_t index,
                                       int32_t *out_x,
                                       int32_t *out_y,
                                       uint8_t *out_type);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIMERS_H */
