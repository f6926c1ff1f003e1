class Main {
  L<?super N<?super L<?super N<?super L<?super N<?super E<?super E<?super Z>>>>>>>>
  doit(Qr<? super E<? super E<? super Z>>> v) {return v;}
}
