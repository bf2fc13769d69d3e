import init, { decayCurve, eulerCurve, simulateFit, halfLifeDays } from "./pkg/tedium_wasm.js";

function values(section) {
  const out = {};
  for (const input of section.querySelectorAll("input")) {
    out[input.name] = Number(input.value);
    input.nextElementSibling.textContent = input.value;
  }
  return out;
}

function pairs(flat) {
  const pts = [];
  for (let i = 0; i < flat.length; i += 2) pts.push([flat[i], flat[i + 1]]);
  return pts;
}

function plot(canvas, series, xMax, yMax) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  const sx = (x) => pad + (x / xMax) * (w - 2 * pad);
  const sy = (y) => h - pad - (y / yMax) * (h - 2 * pad);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#666";
  ctx.fillText(yMax.toPrecision(3), 2, pad);
  ctx.fillText(`${xMax.toFixed(0)} d`, w - pad - 20, h - pad + 16);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    if (s.bars) {
      const bw = Math.max(2, sx(s.barWidth) - sx(0) - 2);
      for (const [x, y] of s.points) ctx.fillRect(sx(x) - bw / 2, sy(y), bw, sy(0) - sy(y));
      continue;
    }
    ctx.beginPath();
    s.points.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
    if (s.dots) for (const [x, y] of s.points) ctx.fillRect(sx(x) - 2, sy(y) - 2, 4, 4);
  }
}

function drawDecay() {
  const section = document.getElementById("decay");
  const note = section.querySelector(".note");
  const v = values(section);
  try {
    const exact = pairs(decayCurve(v.x0, v.m, v.days, 200));
    const series = [{ points: exact, color: "#1565c0" }];
    let text = `half-life ${halfLifeDays(v.m).toFixed(2)} days`;
    try {
      const euler = pairs(eulerCurve(v.x0, v.m, v.days, v.steps));
      series.push({ points: euler, color: "#e65100", dots: true });
      const err = Math.abs(euler[euler.length - 1][1] - exact[exact.length - 1][1]);
      text += `; Euler end-point error ${err.toExponential(2)}`;
    } catch (e) {
      text += `; ${e.message}`;
    }
    plot(section.querySelector("canvas"), series, v.days, v.x0);
    note.textContent = text;
    note.className = "note";
  } catch (e) {
    note.textContent = e.message;
    note.className = "note error";
  }
}

function drawFit() {
  const section = document.getElementById("fit");
  const note = section.querySelector(".note");
  const v = values(section);
  const days = 150;
  const doc = JSON.parse(simulateFit(v.x0, v.m, v.lambda0, days, v.bin, BigInt(v.seed)));
  const yMax = Math.max(1, ...doc.bins.map((b) => b[1]));
  const series = [{ points: doc.bins, color: "#90a4ae", bars: true, barWidth: v.bin }];
  if (doc.fit.accepted) {
    const curve = pairs(decayCurve(doc.fit.x0, doc.fit.m_per_day, days, 200));
    series.push({ points: curve, color: "#c62828" });
    note.textContent =
      `${doc.events} events; fitted m = ${doc.fit.m_per_day.toFixed(4)}/day ` +
      `(true ${doc.truth.m_per_day}), R² = ${(doc.fit.r_squared ?? NaN).toFixed(3)}`;
  } else {
    note.textContent = `${doc.events} events; fit not accepted: ${doc.fit.error ?? doc.fit.warnings.join(", ")}`;
  }
  plot(section.querySelector("canvas"), series, days, yMax * 1.05);
}

await init();
for (const [id, draw] of [["decay", drawDecay], ["fit", drawFit]]) {
  document.getElementById(id).addEventListener("input", draw);
  draw();
}
