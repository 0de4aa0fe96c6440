import init, { simulate, point_spread } from "./pkg/jrc_rsp_web.js";

const $ = (id) => document.getElementById(id);
const FLOOR_DB = -60;
let scene = null;

function shade(db) {
  const t = Math.max(0, Math.min(1, 1 - db / FLOOR_DB));
  const v = Math.round(255 * (1 - t));
  return [v, v, 255];
}

function drawImage(canvas, img) {
  const rows = img.rows, cols = img.cols, db = img.db();
  const off = document.createElement("canvas");
  off.width = cols;
  off.height = rows;
  const ctx = off.getContext("2d");
  const px = ctx.createImageData(cols, rows);
  for (let i = 0; i < rows * cols; i++) {
    const [r, g, b] = shade(db[i]);
    px.data.set([r, g, b, 255], 4 * i);
  }
  ctx.putImageData(px, 0, 0);
  const out = canvas.getContext("2d");
  out.imageSmoothingEnabled = false;
  out.clearRect(0, 0, canvas.width, canvas.height);
  out.drawImage(off, 0, 0, canvas.width, canvas.height);
}

function toPixel(canvas, img, range, az) {
  const azs = img.azimuths_deg();
  const step = azs.length > 1 ? azs[1] - azs[0] : 1;
  const x = ((az - azs[0]) / step + 0.5) * canvas.width / img.cols;
  const y = ((range - img.first_range_m) / img.range_step_m + 0.5) * canvas.height / img.rows;
  return [x, y];
}

function triples(flat) {
  const out = [];
  for (let i = 0; i < flat.length; i += 3) out.push([flat[i], flat[i + 1], flat[i + 2]]);
  return out;
}

function runScene() {
  const snr = $("snr").value.trim().toLowerCase() === "inf" ? Infinity : Number($("snr").value);
  scene = simulate($("config").value, snr, Number($("trial").value), $("mfMode").value, $("musicMode").value);
  const img = scene.image();
  const canvas = $("image");
  drawImage(canvas, img);
  const ctx = canvas.getContext("2d");
  const truths = triples(scene.truths());
  const dets = triples(scene.detections());
  ctx.lineWidth = 2;
  ctx.strokeStyle = "#0a0";
  for (const [r, a] of truths) {
    const [x, y] = toPixel(canvas, img, r, a);
    ctx.beginPath();
    ctx.arc(x, y, 9, 0, 2 * Math.PI);
    ctx.stroke();
  }
  ctx.strokeStyle = "#d00";
  for (const [r, a] of dets) {
    const [x, y] = toPixel(canvas, img, r, a);
    ctx.beginPath();
    ctx.moveTo(x - 6, y - 6); ctx.lineTo(x + 6, y + 6);
    ctx.moveTo(x + 6, y - 6); ctx.lineTo(x - 6, y + 6);
    ctx.stroke();
  }
  const body = $("detections");
  body.innerHTML = "";
  dets.forEach(([r, a, v], i) => {
    let best = truths[0];
    for (const t of truths) {
      if (Math.hypot(t[0] - r, (t[1] - a) / 10) < Math.hypot(best[0] - r, (best[1] - a) / 10)) best = t;
    }
    const tr = document.createElement("tr");
    tr.innerHTML = `<td>${i + 1}</td><td>${r.toFixed(3)}</td><td>${a.toFixed(1)}</td><td>${v.toFixed(2)}</td><td>${best[2].toFixed(2)}</td>`;
    tr.onclick = () => showSpectrum(i, best[2]);
    body.appendChild(tr);
  });
  if (dets.length) showSpectrum(0, null);
}

function showSpectrum(index, truthV) {
  [...$("detections").children].forEach((tr, i) => tr.classList.toggle("sel", i === index));
  const mu = scene.spectrum_db(index);
  const v = scene.spectrum_velocity_mps();
  const c = $("spectrum"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  if (!mu.length) return;
  const pad = 30, lo = Math.max(Math.min(...mu), -120);
  const x = (vel) => pad + (vel - v[0]) / (v[v.length - 1] - v[0]) * (c.width - 2 * pad);
  const y = (db) => pad + (Math.max(db, lo) / lo) * (c.height - 2 * pad);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, c.width - 2 * pad, c.height - 2 * pad);
  ctx.fillStyle = "#000";
  ctx.fillText(`${v[0].toFixed(1)} m/s`, pad, c.height - 10);
  ctx.fillText(`${v[v.length - 1].toFixed(1)} m/s`, c.width - pad - 50, c.height - 10);
  ctx.fillText("0 dB", 2, pad + 4);
  ctx.fillText(`${lo.toFixed(0)} dB`, 2, c.height - pad);
  ctx.strokeStyle = "#00c";
  ctx.beginPath();
  mu.forEach((m, i) => (i ? ctx.lineTo(x(v[i]), y(m)) : ctx.moveTo(x(v[i]), y(m))));
  ctx.stroke();
  if (truthV !== null && truthV !== undefined) {
    ctx.strokeStyle = "#0a0";
    ctx.beginPath();
    ctx.moveTo(x(truthV), pad);
    ctx.lineTo(x(truthV), c.height - pad);
    ctx.stroke();
  }
}

function runPsf() {
  const psf = point_spread($("config").value, $("psfMode").value, Number($("psfRange").value), Number($("psfAz").value));
  drawImage($("psf"), psf.image());
  $("psfErr").textContent = `RMS deviation from double precision: ${psf.error_db.toFixed(1)} dB`;
}

function guarded(fn) {
  return () => {
    $("status").textContent = "";
    try {
      fn();
    } catch (e) {
      $("status").textContent = String(e.message ?? e);
    }
  };
}

await init();
$("config").value = await (await fetch("default.cfg")).text();
$("run").onclick = guarded(runScene);
$("psfRun").onclick = guarded(runPsf);
$("status").textContent = "";
guarded(runScene)();
guarded(runPsf)();
