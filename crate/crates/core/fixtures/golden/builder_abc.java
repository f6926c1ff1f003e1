abstract class B<x> {
  static B<ML<?super N<?super Lhash<?super N<?super E<?super E<?super Z>>>>>>> start;
  abstract QWRstart<?super Lhash<?super N<?super x>>> stop();
  abstract B<La<?super N<?super x>>> a();
  abstract B<Lb<?super N<?super x>>> b();
  abstract B<Lc<?super N<?super x>>> c();
}
