//! The five subcommands. Each returns the files it wants written (or text
//! for stdout); `main` owns the I/O and exit codes.

use squeezer_core::{
    correct_apparent_level, equivalent_power_factor, fit_eta_r, fit_eta_x, lo_phase_sweep,
    loop_suppression, parametric_gain, pdh_sweep, project_detector, project_injected,
    pump_phase_sweep, residual_jitter, synthesize_spectrum, DecibelLevel, DemodHarmonic,
    ErrorSignalTrace, FitResult, GainBranch, MainsSpec,
};

use crate::config::RunConfig;
use crate::report::{num, timestamp_header, Doc};
use crate::{CliError, OutputFormat};

/// One output artifact: file name (when `--out` is used) plus content.
pub struct Artifact {
    pub file_name: String,
    pub content: String,
}

pub struct CommandOutput {
    pub artifacts: Vec<Artifact>,
}

impl CommandOutput {
    fn one(file_name: &str, content: String) -> Self {
        CommandOutput {
            artifacts: vec![Artifact {
                file_name: file_name.to_string(),
                content,
            }],
        }
    }
}

pub fn cmd_spectrum(
    cfg: &RunConfig,
    band: Option<(f64, f64)>,
    points_per_decade: Option<u32>,
    mains: Option<bool>,
    format: OutputFormat,
) -> Result<CommandOutput, CliError> {
    let band = band.unwrap_or((cfg.spectrum.band_hz[0], cfg.spectrum.band_hz[1]));
    let ppd = points_per_decade.unwrap_or(cfg.spectrum.points_per_decade);
    let mains_on = mains.unwrap_or(cfg.spectrum.mains);
    let mains_spec = mains_on.then_some(MainsSpec {
        peak_db: cfg.spectrum.mains_peak_db,
    });

    let opo = cfg.opo_params()?;
    let homodyne = cfg.homodyne_params()?;
    let set = synthesize_spectrum(|f| opo.spectrum_at(f), &homodyne, band, ppd, mains_spec)?;

    let echo = format!(
        "scenario={} band_hz={}:{} points_per_decade={} mains={} x={} eta_esc={} eta_det={} dark_clearance_db={} units=dB_rel_shot",
        cfg.scenario,
        num(band.0),
        num(band.1),
        ppd,
        if mains_on { "on" } else { "off" },
        num(cfg.opo.x),
        num(cfg.opo.eta_esc),
        num(homodyne.detection_efficiency().eta()),
        num(cfg.homodyne.dark_clearance_db),
    );

    let mut doc = Doc::new();
    doc.section(0, "spectrum_run")
        .kv(1, "scenario", &cfg.scenario)
        .kv(1, "band_hz", format!("{}:{}", num(band.0), num(band.1)))
        .kv(1, "points_per_decade", ppd)
        .kv(1, "mains", if mains_on { "on" } else { "off" })
        .kv(1, "rows", set.len())
        .kv(1, "shot_db_first", num(set.shot.samples[0].1))
        .kv(1, "squeezed_db_first", num(set.squeezed.samples[0].1))
        .kv(
            1,
            "antisqueezed_db_first",
            num(set.anti_squeezed.samples[0].1),
        )
        .kv(
            1,
            "artifact_frequencies_hz",
            format!("{:?}", set.shot.artifact_frequencies_hz),
        );

    match format {
        OutputFormat::Csv => Ok(CommandOutput {
            artifacts: vec![
                Artifact {
                    file_name: "spectrum.csv".to_string(),
                    content: set.to_csv(&echo),
                },
                Artifact {
                    file_name: "spectrum_report.txt".to_string(),
                    content: format!("{}{}", timestamp_header(), doc.finish()),
                },
            ],
        }),
        OutputFormat::Doc => {
            doc.section(1, "samples");
            for i in 0..set.len() {
                doc.note(
                    2,
                    &format!(
                        "- {} {} {} {}",
                        num(set.shot.samples[i].0),
                        num(set.shot.samples[i].1),
                        num(set.squeezed.samples[i].1),
                        num(set.anti_squeezed.samples[i].1)
                    ),
                );
            }
            Ok(CommandOutput::one("spectrum.txt", doc.finish()))
        }
    }
}

/// Fit, injection and projection chain; shared by `fit` and `report`.
fn fit_chain(cfg: &RunConfig, sq_db: f64, anti_db: f64, dark_corrected: bool, doc: &mut Doc) -> Result<(), CliError> {
    let (sq_used, anti_used) = if dark_corrected {
        let clearance = cfg.homodyne.dark_clearance_db;
        let sq = correct_apparent_level(DecibelLevel::new(sq_db).map_err(CliError::Physics)?, clearance)?;
        let anti =
            correct_apparent_level(DecibelLevel::new(anti_db).map_err(CliError::Physics)?, clearance)?;
        (sq.db(), anti.db())
    } else {
        (sq_db, anti_db)
    };

    doc.section(1, "input")
        .kv(2, "sq_db", num(sq_db))
        .kv(2, "anti_db", num(anti_db))
        .kv(2, "dark_corrected", dark_corrected);
    if dark_corrected {
        doc.kv(2, "sq_db_corrected", num(sq_used))
            .kv(2, "anti_db_corrected", num(anti_used));
    }

    let pure = fit_eta_r(sq_used, anti_used)?;
    let opo = fit_eta_x(sq_used, anti_used)?;
    doc.section(1, "pure_state_model")
        .kv(2, "eta", num(pure.eta.eta()))
        .kv(2, "loss_percent", num(100.0 * pure.loss()))
        .kv(2, "r", num(pure.strength))
        .kv(2, "residual", format!("{:.3e}", pure.residual));
    doc.section(1, "opo_model")
        .kv(2, "eta", num(opo.eta.eta()))
        .kv(2, "x", num(opo.strength))
        .kv(2, "residual", format!("{:.3e}", opo.residual));

    projection_sections(cfg, &pure, doc)?;
    Ok(())
}

fn projection_sections(cfg: &RunConfig, fit: &FitResult, doc: &mut Doc) -> Result<(), CliError> {
    let bhd = cfg.bhd_efficiency()?;
    doc.section(1, "injection")
        .kv(2, "bhd_efficiency", num(bhd.eta()));
    let injected = match project_injected(fit, bhd) {
        Ok(level) => level,
        // a fit purer than the configured BHD efficiency leaves nothing to
        // subtract; report the inconsistency instead of failing the run
        Err(squeezer_core::Error::InconsistentBudget { .. }) => {
            doc.kv(
                2,
                "injected_db",
                "not_available (fitted total exceeds the BHD efficiency)",
            );
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    doc.kv(2, "injected_db", num(injected.db()));

    doc.section(1, "projection");
    for loss in &cfg.budget.extra_loss_scenarios {
        let eta = squeezer_core::Efficiency::new(1.0 - loss).map_err(CliError::Physics)?;
        let budget = squeezer_core::LossBudget::from_pairs([("extra_loss_scenario", eta.eta())])
            .map_err(CliError::Physics)?;
        let detected = project_detector(injected, &budget)?;
        let pct = format!("{:.4}", 100.0 * loss);
        let pct = pct.trim_end_matches('0').trim_end_matches('.');
        doc.kv(
            2,
            &format!("extra_loss_{pct}_percent_detected_db"),
            num(detected.db()),
        );
    }
    let extra = cfg.extra_budget()?;
    if extra.is_empty() {
        doc.kv(2, "budget_detected_db", "missing (budget.extra is empty)");
    } else {
        let total = extra.total_efficiency()?;
        let detected = project_detector(injected, &extra)?;
        doc.kv(2, "budget_total_eta", num(total.eta()))
            .kv(2, "budget_detected_db", num(detected.db()));
    }
    doc.kv(
        2,
        "equivalent_power_factor_6db",
        num(equivalent_power_factor(6.0)?),
    );
    Ok(())
}

pub fn cmd_fit(
    cfg: &RunConfig,
    sq_db: Option<f64>,
    anti_db: Option<f64>,
    dark_corrected: bool,
) -> Result<CommandOutput, CliError> {
    let sq = sq_db.unwrap_or(cfg.fit.sq_db);
    let anti = anti_db.unwrap_or(cfg.fit.anti_db);
    let mut doc = Doc::new();
    doc.section(0, "fit_report").kv(1, "scenario", &cfg.scenario);
    fit_chain(cfg, sq, anti, dark_corrected, &mut doc)?;
    Ok(CommandOutput::one("fit_report.txt", doc.finish()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Selector {
    Pdh,
    PumpPhase,
    LoPhase,
}

pub fn cmd_errorsignal(
    cfg: &RunConfig,
    selector: Selector,
    cavity: Option<String>,
    span_hz: Option<f64>,
    points: usize,
    demod_harmonic: Option<u32>,
    format: OutputFormat,
) -> Result<CommandOutput, CliError> {
    let (trace, sweep_label, file_stem) = match selector {
        Selector::Pdh => {
            let name = cavity.unwrap_or_else(|| "mc532".to_string());
            let c = cfg.cavity(&name)?;
            let loop_cfg = cfg.loop_config(&format!("{name}_length"))?;
            let fwhm = c.linewidth_fwhm()?;
            let half_span = span_hz.map_or(3.0 * fwhm, |s| 0.5 * s);
            let trace = pdh_sweep(
                &c,
                loop_cfg.modulation_frequency_hz(),
                0.1,
                (-half_span, half_span),
                points,
            )?;
            (trace, "detuning_hz", format!("errorsignal_pdh_{name}"))
        }
        Selector::PumpPhase => {
            let opo = cfg.opo_params()?;
            let loop_cfg = cfg.loop_config("pump_phase")?;
            let offset = cfg
                .control_beam
                .as_ref()
                .map_or(loop_cfg.modulation_frequency_hz(), |b| b.offset_hz);
            let harmonic = match demod_harmonic {
                Some(n) => DemodHarmonic::from_index(n)?,
                None => loop_cfg.demod_harmonic(),
            };
            let trace = pump_phase_sweep(
                &opo,
                offset,
                harmonic,
                loop_cfg.demod_phase_rad(),
                points,
            )?;
            (trace, "pump_phase_rad", "errorsignal_pump_phase".to_string())
        }
        Selector::LoPhase => {
            let loop_cfg = cfg.loop_config("lo_phase")?;
            let trace = lo_phase_sweep(1.0, 0.0, loop_cfg.demod_phase_rad(), points)?;
            (trace, "lo_phase_rad", "errorsignal_lo_phase".to_string())
        }
    };

    let content = match format {
        OutputFormat::Csv => trace_csv(&trace, sweep_label, &cfg.scenario),
        OutputFormat::Doc => trace_doc(&trace, sweep_label),
    };
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Doc => "txt",
    };
    Ok(CommandOutput::one(&format!("{file_stem}.{ext}"), content))
}

fn trace_csv(trace: &ErrorSignalTrace, sweep_label: &str, scenario: &str) -> String {
    let mut out = format!(
        "# scenario={scenario} signal={} sweep={sweep_label} units=normalized sign=positive_slope_through_lock\n",
        trace.label
    );
    out.push_str("sweep_value,error_value\n");
    for (x, e) in &trace.samples {
        out.push_str(&format!("{x:.9e},{e:.9e}\n"));
    }
    out
}

fn trace_doc(trace: &ErrorSignalTrace, sweep_label: &str) -> String {
    let mut doc = Doc::new();
    doc.section(0, "error_signal")
        .kv(1, "signal", &trace.label)
        .kv(1, "sweep", sweep_label)
        .kv(1, "points", trace.samples.len())
        .section(1, "samples");
    for (x, e) in &trace.samples {
        doc.note(2, &format!("- {} {}", num(*x), num(*e)));
    }
    doc.finish()
}

pub fn cmd_loop(
    cfg: &RunConfig,
    name: &str,
    band: Option<(f64, f64)>,
    format: OutputFormat,
) -> Result<CommandOutput, CliError> {
    let loop_cfg = cfg.loop_config(name)?;
    let band = band.unwrap_or((10.0, 1e5));
    let noise = cfg
        .phase_noise_model()?
        .ok_or_else(|| CliError::Config(crate::config::ConfigError(
            "phase_noise: section required for the loop command".to_string(),
        )))?;

    let theta = residual_jitter(|f| noise.amplitude_density(f), Some(&loop_cfg), band)?;
    let free = residual_jitter(|f| noise.amplitude_density(f), None, band)?;

    // what the residual jitter costs in detected squeezing
    let opo = cfg.opo_params()?;
    let homodyne = cfg.homodyne_params()?;
    let detected = opo
        .spectrum_at(1e3)
        .apply_loss(homodyne.detection_efficiency());
    let (sq_before, _) = detected.to_db();
    let (sq_after, _) = detected.apply_phase_jitter(theta)?.to_db();

    let mut doc = Doc::new();
    doc.section(0, "loop_report")
        .kv(1, "scenario", &cfg.scenario)
        .kv(1, "loop", name)
        .kv(1, "unity_gain_frequency_hz", num(loop_cfg.unity_gain_frequency_hz()))
        .kv(1, "filter_slope", loop_cfg.filter_slope())
        .kv(1, "band_hz", format!("{}:{}", num(band.0), num(band.1)))
        .kv(1, "free_running_theta_rms_rad", num(free))
        .kv(1, "residual_theta_rms_rad", num(theta))
        .kv(1, "detected_sq_db_no_jitter", num(sq_before.db()))
        .kv(1, "detected_sq_db_with_jitter", num(sq_after.db()));

    // suppression trace on a fixed 100-per-decade grid
    let n = ((band.1 / band.0).log10() * 100.0).ceil().max(1.0) as usize;
    let mut trace = String::from("frequency_hz,suppression\n");
    for i in 0..=n {
        let f = band.0 * (band.1 / band.0).powf(i as f64 / n as f64);
        trace.push_str(&format!("{f:.9e},{:.9e}\n", loop_suppression(&loop_cfg, f)?));
    }
    let trace_header = format!(
        "# scenario={} loop={name} ugf_hz={} slope={}\n",
        cfg.scenario,
        num(loop_cfg.unity_gain_frequency_hz()),
        loop_cfg.filter_slope()
    );

    match format {
        OutputFormat::Csv => Ok(CommandOutput {
            artifacts: vec![
                Artifact {
                    file_name: format!("loop_{name}.txt"),
                    content: doc.finish(),
                },
                Artifact {
                    file_name: format!("loop_{name}_suppression.csv"),
                    content: format!("{trace_header}{trace}"),
                },
            ],
        }),
        OutputFormat::Doc => Ok(CommandOutput::one(&format!("loop_{name}.txt"), doc.finish())),
    }
}

pub fn cmd_report(cfg: &RunConfig, config_source: &str) -> Result<CommandOutput, CliError> {
    let mut doc = Doc::new();
    doc.section(0, "report")
        .kv(1, "scenario", &cfg.scenario)
        .kv(1, "config_source", config_source);

    doc.section(0, "cavities");
    for name in cfg.cavity.keys() {
        let c = cfg.cavity(name)?;
        doc.section(1, name)
            .kv(2, "finesse", num(c.finesse()?))
            .kv(2, "fsr_hz", num(c.fsr()))
            .kv(2, "fwhm_hz", num(c.linewidth_fwhm()?))
            .kv(2, "one_way_optical_path_m", num(c.one_way_optical_path()));
    }

    if let Some(beam) = &cfg.control_beam {
        if let Some(offset) = beam.p_pol_offset_hz {
            let c = cfg.cavity(&cfg.opo.cavity)?;
            let lambda = cfg.cavity_wavelength(&cfg.opo.cavity)?;
            let delta = c.path_difference_for_offset(offset, lambda)?;
            let back = c.co_resonance_offset(delta, lambda)?;
            doc.section(0, "co_resonance")
                .kv(1, "p_pol_offset_hz", num(offset))
                .kv(1, "round_trip_phase_rad", num(c.round_trip_phase(offset)))
                .kv(1, "implied_path_difference_m", format!("{delta:.6e}"))
                .kv(1, "offset_from_path_difference_hz", num(back));
        }
    }

    let opo = cfg.opo_params()?;
    doc.section(0, "opo")
        .kv(1, "x", num(opo.x()))
        .kv(1, "gamma_rad_s", num(opo.gamma()))
        .kv(
            1,
            "parametric_gain_amplification",
            num(parametric_gain(opo.x(), GainBranch::Amplification)?),
        )
        .kv(
            1,
            "parametric_gain_deamplification",
            num(parametric_gain(opo.x(), GainBranch::Deamplification)?),
        )
        .kv(1, "eta_esc", num(opo.eta_esc().eta()));

    let homodyne = cfg.homodyne_params()?;
    doc.section(0, "homodyne")
        .kv(1, "lo_power_w", num(homodyne.lo_power_w()))
        .kv(1, "visibility", num(homodyne.visibility()))
        .kv(1, "pd_quantum_efficiency", num(homodyne.pd_quantum_efficiency()))
        .kv(1, "detection_efficiency", num(homodyne.detection_efficiency().eta()))
        .kv(1, "dark_clearance_db", num(homodyne.dark_clearance_db()));

    doc.section(0, "fit_report");
    fit_chain(cfg, cfg.fit.sq_db, cfg.fit.anti_db, false, &mut doc)?;

    doc.section(0, "budget");
    let extra = cfg.extra_budget()?;
    if extra.is_empty() {
        doc.kv(1, "entries", "none");
    } else {
        for (name, eta) in extra.iter() {
            doc.kv(1, name, num(eta.eta()));
        }
        doc.kv(1, "total_eta", num(extra.total_efficiency()?.eta()));
    }

    doc.section(0, "loops");
    for name in cfg.loops.keys() {
        let l = cfg.loop_config(name)?;
        doc.section(1, name)
            .kv(2, "unity_gain_frequency_hz", num(l.unity_gain_frequency_hz()))
            .kv(2, "modulation_frequency_hz", num(l.modulation_frequency_hz()))
            .kv(2, "demod_harmonic", l.demod_harmonic().index());
    }

    doc.section(0, "provenance");
    for line in cfg.echo_toml().lines() {
        doc.note(1, line);
    }

    Ok(CommandOutput::one(
        "report.txt",
        format!("{}{}", timestamp_header(), doc.finish()),
    ))
}
