function z(){return n=>fetch(n)}function Q(){let n=globalThis.WebSocket;return n===void 0?null:e=>new n(e)}function k(n){return`${n.app.hostname}/${n.app.appName}`}var y=class{constructor(e,t=z()){this.baseUrl=e;this.fetchImpl=t}fetchImpl;async metrics(){let e=await this.fetchImpl(`${this.baseUrl}/api/v1/metrics`);if(!e.ok)throw new Error(`metrics: HTTP ${e.status}`);return await e.json()}async latestSnapshot(e){let t=e===void 0?"":`?app=${encodeURIComponent(e)}`,s=await this.fetchImpl(`${this.baseUrl}/api/v1/snapshot/latest${t}`);if(s.status===404)return null;if(!s.ok)throw new Error(`snapshot: HTTP ${s.status}`);return await s.json()}async heatmap(e,t,s){let o=new URLSearchParams({metric:e,mode:t});s!==void 0&&o.set("app",s);let r=await this.fetchImpl(`${this.baseUrl}/api/v1/heatmap?${o}`);if(r.status===404)return null;if(!r.ok)throw new Error(`heatmap: ${await r.text()}`);return await r.json()}},x=class{constructor(e,t){this.baseUrl=e;this.options=t;this.client=new y(e,t.fetchImpl??z()),this.wsFactory=t.wsFactory===void 0?Q():t.wsFactory,this.pollMillis=t.pollMillis??1e3}client;wsFactory;pollMillis;socket=null;pollTimer=null;lastTick=null;lastApp=null;stopped=!1;start(){if(this.stopped=!1,this.wsFactory===null){this.startPolling();return}this.setStatus("connecting");let e=`${this.baseUrl.replace(/^http/,"ws")}/api/v1/stream`,t;try{t=this.wsFactory(e)}catch{this.startPolling();return}this.socket=t,t.onopen=()=>this.setStatus("websocket"),t.onmessage=s=>{try{this.deliver(JSON.parse(String(s.data)))}catch{}},t.onerror=()=>this.fallBack(),t.onclose=()=>this.fallBack()}stop(){if(this.stopped=!0,this.socket!==null){let e=this.socket;this.socket=null,e.onclose=null,e.onerror=null;try{e.close()}catch{}}this.pollTimer!==null&&(clearInterval(this.pollTimer),this.pollTimer=null),this.setStatus("stopped")}fallBack(){if(!(this.stopped||this.pollTimer!==null)){if(this.socket!==null){this.socket.onclose=null,this.socket.onerror=null;try{this.socket.close()}catch{}this.socket=null}this.startPolling()}}startPolling(){if(this.stopped||this.pollTimer!==null)return;this.setStatus("polling");let e=()=>{this.client.latestSnapshot(this.options.app).then(t=>{t!==null&&this.deliver(t)}).catch(()=>{})};e(),this.pollTimer=setInterval(e,this.pollMillis)}deliver(e){if(this.stopped)return;let t=k(e);this.options.app!==void 0&&t!==this.options.app||t===this.lastApp&&e.tickIndex===this.lastTick||(this.lastApp=t,this.lastTick=e.tickIndex,this.options.onSnapshot(e))}setStatus(e){this.options.onStatus?.(e)}};var Z=[[0,0,255],[0,255,255],[0,255,0],[255,255,0],[255,0,0]];function Y(n,e,t,s=Z){let r=(e===t?.5:Math.min(1,Math.max(0,(n-e)/(t-e))))*(s.length-1),i=Math.min(Math.floor(r),s.length-2),l=r-i,[a,c]=[s[i],s[i+1]];return[Math.round(a[0]+(c[0]-a[0])*l),Math.round(a[1]+(c[1]-a[1])*l),Math.round(a[2]+(c[2]-a[2])*l)]}function w([n,e,t],s=1){return s>=1?`rgb(${n},${e},${t})`:`rgba(${n},${e},${t},${s})`}function N(n){return`linear-gradient(to right, ${n.map((t,s)=>`${w(t)} ${100*s/(n.length-1)}%`).join(", ")})`}function h(n,e){return{sx:(n.x-n.z)*28*e.zoom+e.panX,sy:((n.x+n.z)*14-n.y*24)*e.zoom+e.panY}}function C(n,e){let t=n.x,s=n.x+n.width,o=n.z,r=n.z+n.depth,i=n.yBase,l=n.yBase+n.height,a=(c,m,f)=>h({x:c,y:m,z:f},e);return{top:[a(t,l,o),a(s,l,o),a(s,l,r),a(t,l,r)],left:[a(t,l,r),a(s,l,r),a(s,i,r),a(t,i,r)],right:[a(s,l,o),a(s,l,r),a(s,i,r),a(s,i,o)]}}function _(n,e,t){let s={panX:0,panY:0,zoom:1},o=1/0,r=-1/0,i=1/0,l=-1/0;for(let c of n)for(let m of[0,c.width])for(let f of[0,c.depth])for(let b of[0,c.height]){let g=h({x:c.x+m,y:c.yBase+b,z:c.z+f},s);o=Math.min(o,g.sx),r=Math.max(r,g.sx),i=Math.min(i,g.sy),l=Math.max(l,g.sy)}if(!Number.isFinite(o)||r===o||l===i)return{panX:e/2,panY:t/2,zoom:1};let a=.85*Math.min(e/(r-o),t/(l-i));return{panX:e/2-(o+r)/2*a,panY:t/2-(i+l)/2*a,zoom:a}}function E(n,e,t){let s=!1;for(let o=0,r=t.length-1;o<t.length;r=o++){let i=t[o],l=t[r];i.sy>e!=l.sy>e&&n<(l.sx-i.sx)*(e-i.sy)/(l.sy-i.sy)+i.sx&&(s=!s)}return s}function X(n,e,t,s){let o=s.sx-t.sx,r=s.sy-t.sy,i=o*o+r*r,l=i===0?0:Math.min(1,Math.max(0,((n-t.sx)*o+(e-t.sy)*r)/i)),a=t.sx+l*o,c=t.sy+l*r;return Math.hypot(n-a,e-c)}var ee=4;function H(n,e,t,s){for(let o of n.edges){let r=h(o.from,s),i=h(o.to,s);if(X(e,t,r,i)<=o.width+ee)return{kind:"edge",edge:o.edge}}for(let o=n.boxes.length-1;o>=0;o--){let{box:r}=n.boxes[o],i=C(r,s);if(E(e,t,i.top)||E(e,t,i.left)||E(e,t,i.right))return{kind:r.kind,nodeId:r.nodeId}}return null}function M(n){let e=n.slice(n.lastIndexOf("/")+1);return e.slice(e.lastIndexOf(".")+1)}function j(n){return Number.isInteger(n)?String(n):n.toFixed(2)}function A(n,e){for(let t of n){if(t.packageId===e)return t;let s=A(t.packages,e);if(s!==null)return s}return null}function q(n){return n.classes.length+n.packages.reduce((e,t)=>e+q(t),0)}function te(n,e,t){let s=[];for(let o of t){let r=e.metricScores[o.metricId],i=r!==void 0?r[n]??0:0;o.metricId==="instance_count"?s.push(`${j(i)} objects were instantiated`):s.push(`${o.displayName}: ${j(i)}`)}return s}function W(n,e,t){if(n===null)return null;switch(n.kind){case"foundation":return null;case"class":return{title:M(n.nodeId),lines:te(n.nodeId,e,t)};case"package":{let s=A(e.structure.packages,n.nodeId);return s===null?null:{title:s.name,lines:[`${q(s)} classes inside`]}}case"edge":{let s=M(n.edge.callerClassId),o=M(n.edge.calleeClassId);return{title:`${s} \u2192 ${o}`,lines:[`${s} called ${o} ${n.edge.callCount} times`]}}}}var ne=.4,V=.25,se=1.5,ie={small:1.5,medium:3,large:4.5},oe={waiting:!0,boxes:[],edges:[],spots:[],connectors:[],legend:null};function re(n,e){let t=new Set,s=r=>{for(let i of r.packages)t.add(i.packageId),s(i);for(let i of r.classes)t.add(i.classId)},o=r=>{if(!e.isPackageOpen(r.packageId)){s(r);return}for(let i of r.packages)o(i)};for(let r of n.structure.packages)o(r);return t}function ae(n,e){let t=new Set;for(let s of n)s.callerClassId===e?t.add(s.calleeClassId):s.calleeClassId===e&&t.add(s.callerClassId);return t}function R(n){return{x:n.x+n.width/2,y:n.yBase+n.height,z:n.z+n.depth/2}}function B(n,e,t){if(n===null)return oe;let s=re(n,e),o=new Map;for(let d of n.geometry.boxes)o.set(d.nodeId,d);let r=n.edges.filter(d=>!s.has(d.callerClassId)&&!s.has(d.calleeClassId)),i=e.selectedClass!==null&&!s.has(e.selectedClass)?e.selectedClass:null,l=i!==null?ae(r,i):null;l!==null&&i!==null&&l.add(i);let a=e.heatmapEnabled&&t!==null,c=a?ne:1,m=[];for(let d of n.geometry.boxes){if(s.has(d.nodeId))continue;let u=l!==null&&d.kind==="class"&&!l.has(d.nodeId);m.push({box:d,selected:d.nodeId===i,faded:u,opacity:u?c*V:c})}m.sort((d,u)=>d.box.yBase-u.box.yBase||d.box.x+d.box.z-(u.box.x+u.box.z));let f=[];for(let d of r){let u=o.get(d.callerClassId),S=o.get(d.calleeClassId);if(u===void 0||S===void 0)continue;let p=i!==null&&d.callerClassId!==i&&d.calleeClassId!==i;f.push({edge:d,from:R(u),to:R(S),width:ie[d.thicknessClass],faded:p,opacity:p?c*V:c})}let b=[],g=[],D=null;if(a&&t!==null){let d=t.gradientStops.map(p=>[p[0],p[1],p[2]]);D={metricId:t.metricId,mode:t.mode,min:t.legendMin,max:t.legendMax,stops:d};let u=n.geometry.boxes.find(p=>p.kind==="foundation"),S=u!==void 0?u.yBase+u.height:0;for(let p of n.geometry.anchors){if(s.has(p.classId))continue;let L=t.values[p.classId];if(L===void 0)continue;let v=o.get(p.classId),J=v!==void 0?Math.max(v.width,v.depth):1,O={x:p.x,y:S,z:p.z};b.push({classId:p.classId,center:O,radius:se*J,value:L,color:Y(L,t.legendMin,t.legendMax,d)}),v!==void 0&&g.push({classId:p.classId,from:R(v),to:O})}}return{waiting:!1,boxes:m,edges:f,spots:b,connectors:g,legend:D}}var I=["snapshot","aggregated","windowed"],P=class{heatmapEnabled=!1;mode="snapshot";selectedClass=null;hoveredEntity=null;camera={panX:0,panY:0,zoom:1};notice=null;metricId="instance_count";knownMetrics=["instance_count"];closedPackages=new Set;get selectedMetricId(){return this.metricId}setMetrics(e){e.length!==0&&(this.knownMetrics=e.map(t=>t.metricId),this.knownMetrics.includes(this.metricId)||this.selectMetric(this.metricId))}selectMetric(e){this.knownMetrics.includes(e)?(this.metricId=e,this.notice=null):(this.metricId=this.knownMetrics.includes("instance_count")?"instance_count":this.knownMetrics[0],this.notice=`unknown metric "${e}", showing ${this.metricId}`)}cycleMode(e){let t=I.indexOf(this.mode);return this.mode=I[(t+e+I.length)%I.length],this.mode}toggleHeatmap(){return this.heatmapEnabled=!this.heatmapEnabled,this.heatmapEnabled}isPackageOpen(e){return!this.closedPackages.has(e)}togglePackage(e){this.closedPackages.has(e)?this.closedPackages.delete(e):this.closedPackages.add(e)}clickClass(e){this.selectedClass=e===this.selectedClass?null:e}reconcile(e){let t=new Set(e.geometry.boxes.map(s=>s.nodeId));this.selectedClass!==null&&!t.has(this.selectedClass)&&(this.selectedClass=null),this.hoveredEntity!==null&&!t.has(this.hoveredEntity)&&(this.hoveredEntity=null);for(let s of[...this.closedPackages])t.has(s)||this.closedPackages.delete(s)}};var le="#10141a",ce=[154,161,169],U=[[46,125,70],[63,158,90]],de=[70,104,176],pe=[208,58,47],ue="rgba(255,140,26,",he=.2;function $([n,e,t],s,o){return`rgba(${Math.round(n*s)},${Math.round(e*s)},${Math.round(t*s)},${o})`}function me(n){if(n.selected)return pe;let{box:e}=n;if(e.kind==="foundation")return ce;if(e.kind==="package"){let t=Math.max(0,Math.round(e.yBase/he));return U[t%U.length]}return de}function F(n,e,t){n.beginPath(),n.moveTo(e[0].sx,e[0].sy);for(let s=1;s<e.length;s++)n.lineTo(e[s].sx,e[s].sy);n.closePath(),n.fillStyle=t,n.fill()}function K(n,e,t,s,o,r=null){if(n.fillStyle=le,n.fillRect(0,0,s,o),!e.waiting){for(let i of e.boxes){let l=me(i),a=C(i.box,t);if(F(n,a.left,$(l,.55,i.opacity)),F(n,a.right,$(l,.75,i.opacity)),F(n,a.top,$(l,1,i.opacity)),i.box.nodeId===r){n.beginPath(),n.moveTo(a.top[0].sx,a.top[0].sy);for(let c=1;c<a.top.length;c++)n.lineTo(a.top[c].sx,a.top[c].sy);n.closePath(),n.strokeStyle="rgba(255,255,255,0.9)",n.lineWidth=1.5,n.stroke()}}for(let i of e.edges){let l=h(i.from,t),a=h(i.to,t);n.beginPath(),n.moveTo(l.sx,l.sy),n.lineTo(a.sx,a.sy),n.strokeStyle=`${ue}${i.opacity})`,n.lineWidth=i.width*t.zoom,n.stroke()}for(let i of e.spots){let l=h(i.center,t),a=i.radius*28*t.zoom,c=n.createRadialGradient(l.sx,l.sy,0,l.sx,l.sy,a);c.addColorStop(0,w(i.color,.85)),c.addColorStop(1,w(i.color,0)),n.fillStyle=c,n.beginPath(),n.arc(l.sx,l.sy,a,0,2*Math.PI),n.fill()}for(let i of e.connectors){let l=h(i.from,t),a=h(i.to,t);n.beginPath(),n.moveTo(l.sx,l.sy),n.lineTo(a.sx,a.sy),n.strokeStyle="rgba(0,0,0,0.8)",n.lineWidth=1,n.stroke()}}}var ge={snapshot:"snapshot",aggregated:"aggregated",windowed:"windowed"},T=class{view=new P;client;stream;snapshot=null;heat=null;scene;descriptors=[];hovered=null;heatRequest=0;cameraFitted=!1;dragging=null;canvas;ctx;popupEl;noticeEl;statusEl;statsEl;metricSelect;heatmapButton;legendEl;legendStrip;legendMin;legendMax;legendMode;constructor(e,t=window.location.origin){this.client=new y(t),this.scene=B(null,this.view,null),e.innerHTML=`
      <canvas id="city"></canvas>
      <div id="toolbar">
        <span id="title">citypulse</span>
        <label>metric
          <select id="metric"></select>
        </label>
        <button id="heat-toggle">heat map</button>
        <span id="status"></span>
        <span id="stats"></span>
      </div>
      <div id="legend" hidden>
        <button id="mode-prev" title="previous mode">\u2039</button>
        <div id="legend-body">
          <div id="legend-mode"></div>
          <div id="legend-strip"></div>
          <div id="legend-range"><span id="legend-min"></span><span id="legend-max"></span></div>
        </div>
        <button id="mode-next" title="next mode">\u203A</button>
      </div>
      <div id="notice" hidden></div>
      <div id="popup" hidden></div>
      <div id="waiting">waiting for data\u2026</div>
    `,this.canvas=e.querySelector("#city"),this.ctx=this.canvas.getContext("2d"),this.popupEl=e.querySelector("#popup"),this.noticeEl=e.querySelector("#notice"),this.statusEl=e.querySelector("#status"),this.statsEl=e.querySelector("#stats"),this.metricSelect=e.querySelector("#metric"),this.heatmapButton=e.querySelector("#heat-toggle"),this.legendEl=e.querySelector("#legend"),this.legendStrip=e.querySelector("#legend-strip"),this.legendMin=e.querySelector("#legend-min"),this.legendMax=e.querySelector("#legend-max"),this.legendMode=e.querySelector("#legend-mode"),this.metricSelect.addEventListener("change",()=>{this.view.selectMetric(this.metricSelect.value),this.metricSelect.value=this.view.selectedMetricId,this.refreshHeatmap()}),this.heatmapButton.addEventListener("click",()=>{this.view.toggleHeatmap(),this.heatmapButton.classList.toggle("active",this.view.heatmapEnabled),this.refreshHeatmap()}),e.querySelector("#mode-prev").addEventListener("click",()=>{this.view.cycleMode(-1),this.refreshHeatmap()}),e.querySelector("#mode-next").addEventListener("click",()=>{this.view.cycleMode(1),this.refreshHeatmap()}),this.canvas.addEventListener("mousedown",s=>{this.dragging={startX:s.clientX,startY:s.clientY,panX:this.view.camera.panX,panY:this.view.camera.panY}}),window.addEventListener("mouseup",()=>{this.dragging=null}),this.canvas.addEventListener("mousemove",s=>this.onMouseMove(s)),this.canvas.addEventListener("click",s=>this.onClick(s)),this.canvas.addEventListener("wheel",s=>this.onWheel(s),{passive:!1}),window.addEventListener("resize",()=>this.resize()),this.stream=new x(t,{onSnapshot:s=>this.onSnapshot(s),onStatus:s=>{this.statusEl.textContent=s==="websocket"?"live":s}})}start(){this.resize(),this.client.metrics().then(t=>{this.descriptors=t,this.view.setMetrics(t),this.metricSelect.innerHTML="";for(let s of t){let o=document.createElement("option");o.value=s.metricId,o.textContent=s.displayName,o.title=s.description,this.metricSelect.append(o)}this.metricSelect.value=this.view.selectedMetricId}).catch(()=>{}),this.stream.start();let e=()=>{this.draw(),requestAnimationFrame(e)};requestAnimationFrame(e)}onSnapshot(e){this.snapshot=e,this.view.reconcile(e),this.cameraFitted||(this.view.camera=_(e.geometry.boxes,this.canvas.width,this.canvas.height),this.cameraFitted=!0);let t=e.stats;this.statsEl.textContent=`${k(e)} \xB7 tick ${e.tickIndex} \xB7 ${t.spanCount} spans / ${t.traceCount} traces \xB7 ${t.classCount} classes`,this.refreshHeatmap(),this.rebuild()}refreshHeatmap(){if(!this.view.heatmapEnabled||this.snapshot===null){this.heat=null,this.rebuild();return}let e=++this.heatRequest;this.client.heatmap(this.view.selectedMetricId,this.view.mode,k(this.snapshot)).then(t=>{e===this.heatRequest&&(this.heat=t,this.rebuild())}).catch(()=>{e===this.heatRequest&&(this.heat=null,this.rebuild())})}rebuild(){this.scene=B(this.snapshot,this.view,this.heat);let e=this.scene.legend;this.legendEl.hidden=e===null,e!==null&&(this.legendMin.textContent=String(e.min),this.legendMax.textContent=String(e.max),this.legendMode.textContent=`${e.metricId} \xB7 ${ge[e.mode]??e.mode}`,this.legendStrip.style.background=N(e.stops)),this.noticeEl.hidden=this.view.notice===null,this.noticeEl.textContent=this.view.notice??"",document.querySelector("#waiting").hidden=!this.scene.waiting}onMouseMove(e){if(this.dragging!==null){this.view.camera.panX=this.dragging.panX+(e.clientX-this.dragging.startX),this.view.camera.panY=this.dragging.panY+(e.clientY-this.dragging.startY);return}let t=this.canvas.getBoundingClientRect(),s=e.clientX-t.left,o=e.clientY-t.top;this.hovered=H(this.scene,s,o,this.view.camera),this.view.hoveredEntity=this.hovered!==null&&this.hovered.kind!=="edge"?this.hovered.nodeId:null;let r=this.snapshot!==null?W(this.hovered,this.snapshot,this.descriptors):null;if(this.popupEl.hidden=r===null,r!==null){this.popupEl.innerHTML="";let i=document.createElement("strong");i.textContent=r.title,this.popupEl.append(i);for(let l of r.lines){let a=document.createElement("div");a.textContent=l,this.popupEl.append(a)}this.popupEl.style.left=`${e.clientX+14}px`,this.popupEl.style.top=`${e.clientY+14}px`}}onClick(e){let t=this.canvas.getBoundingClientRect(),s=H(this.scene,e.clientX-t.left,e.clientY-t.top,this.view.camera);s===null||s.kind==="foundation"?this.view.clickClass(null):s.kind==="class"?this.view.clickClass(s.nodeId):s.kind==="package"&&this.view.togglePackage(s.nodeId),this.rebuild()}onWheel(e){e.preventDefault();let t=e.deltaY<0?1.1:1/1.1,s=this.view.camera,o=this.canvas.getBoundingClientRect(),r=e.clientX-o.left,i=e.clientY-o.top;s.panX=r-(r-s.panX)*t,s.panY=i-(i-s.panY)*t,s.zoom*=t}resize(){this.canvas.width=window.innerWidth,this.canvas.height=window.innerHeight}draw(){K(this.ctx,this.scene,this.view.camera,this.canvas.width,this.canvas.height,this.view.hoveredEntity)}};var G=document.getElementById("root");if(G===null)throw new Error("missing #root element");new T(G).start();
//# sourceMappingURL=main.js.map
